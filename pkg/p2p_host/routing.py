from dataclasses import dataclass

from p2p_host.exceptions import UnknownPeerError


@dataclass
class RoutingEntry:
    peer_id: object
    address: int
    learned_at: int


class RoutingTable:
    """Relação peer ID -> endereço unicast do cliente mesh."""

    def __init__(self):
        self.entries = {}

    def __contains__(self, peer_id):
        return peer_id in self.entries

    def __len__(self):
        return len(self.entries)

    def update(self, peer_id, address, now_us):
        """Registra ou atualiza o peer. Retorna True se o peer era desconhecido."""
        for outro, entrada in list(self.entries.items()):
            if entrada.address == address and outro != peer_id:
                del self.entries[outro]
        novo = peer_id not in self.entries
        self.entries[peer_id] = RoutingEntry(peer_id, address, now_us)
        return novo

    def lookup(self, peer_id):
        entrada = self.entries.get(peer_id)
        if entrada is None:
            raise UnknownPeerError(f"peer {peer_id} não está na tabela de roteamento")
        return entrada.address

    def peer_for(self, address):
        for entrada in self.entries.values():
            if entrada.address == address:
                return entrada.peer_id
        return None

    def remove(self, peer_id):
        self.entries.pop(peer_id, None)

    def clear(self):
        self.entries.clear()

    def peers(self):
        return sorted(self.entries)
