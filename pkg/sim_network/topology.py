import math


def chave_enlace(a, b):
    return (a, b) if a <= b else (b, a)


class Topology:
    """Posições 2-D dos nós e enlaces simétricos entre pares."""

    def __init__(self, positions=None, links=None):
        self.positions = dict(positions or {})
        self._links = {}
        for (a, b), link in (links or {}).items():
            self.set_link(a, b, link)

    def set_link(self, a, b, link):
        self._links[chave_enlace(a, b)] = link

    def distance(self, a, b):
        return math.dist(self.positions[a], self.positions[b])

    def link(self, a, b):
        """Enlace entre a e b com a distância atual, ou None se não houver."""
        modelo = self._links.get(chave_enlace(a, b))
        if modelo is None or a not in self.positions or b not in self.positions:
            return None
        return modelo.com(distance_m=self.distance(a, b))

    def neighbors(self, name):
        vizinhos = []
        for a, b in self._links:
            if name == a:
                vizinhos.append(b)
            elif name == b:
                vizinhos.append(a)
        return sorted(v for v in vizinhos if self.link(name, v).in_range)
