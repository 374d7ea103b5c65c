from collections import OrderedDict, deque

from dados_comuns.conf import oec_setting
from dados_comuns.utils import s_to_us


class SeenCache:
    """
    Chaves (source, seqno) já processadas. Entradas expiram após ``ttl_s``;
    acima da capacidade sai a menos usada recentemente.
    """

    def __init__(self, clock, ttl_s=None, capacity=None):
        if ttl_s is None:
            ttl_s = oec_setting("OEC_SEEN_TTL_S", 120)
        if capacity is None:
            capacity = oec_setting("OEC_SEEN_CAPACITY", 4096)
        if capacity < 1:
            raise ValueError("capacidade do cache deve ser >= 1")
        self.clock = clock
        self.ttl_us = s_to_us(ttl_s)
        self.capacity = capacity
        self._entradas = OrderedDict()
        self._insercoes = deque()
        self.expiradas = 0
        self.despejadas = 0

    def __len__(self):
        self._expirar()
        return len(self._entradas)

    def __contains__(self, key):
        self._expirar()
        if key not in self._entradas:
            return False
        self._entradas.move_to_end(key)
        return True

    def add(self, key):
        """Registra a chave; False se ela já estava no cache."""
        if key in self:
            return False
        agora = self.clock.now_us()
        self._entradas[key] = agora
        self._insercoes.append((agora, key))
        while len(self._entradas) > self.capacity:
            self._entradas.popitem(last=False)
            self.despejadas += 1
        return True

    def _expirar(self):
        limite = self.clock.now_us() - self.ttl_us
        while self._insercoes and self._insercoes[0][0] <= limite:
            inserida_em, key = self._insercoes.popleft()
            if self._entradas.get(key) == inserida_em:
                del self._entradas[key]
                self.expiradas += 1
