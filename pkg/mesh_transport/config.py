from dataclasses import dataclass, fields

from mesh_transport.constants import T_COUNT_MULTICAST, T_COUNT_UNICAST
from mesh_transport.exceptions import MeshConfigError


@dataclass(frozen=True)
class MeshConfig:
    """
    Parâmetros de transmissão e SAR. t_count=None usa 1 transmissão extra
    para unicast e 2 para multicast.
    """

    t_count: int = None
    t_int_ms: int = 20
    tx_seg_int_step: int = 5
    rx_seg_int_step: int = 5
    mesh_seg_payload: int = 12
    unsegmented_max: int = 11
    max_segments: int = 32
    retries_unicast: int = 1
    retries_multicast: int = 2
    ack_timeout_ms: int = 200
    relay: bool = False
    relay_ttl: int = 3

    def __post_init__(self):
        numericos = [f.name for f in fields(self) if f.name not in ("t_count", "relay")]
        negativos = [nome for nome in numericos if getattr(self, nome) < 0]
        if self.t_count is not None and self.t_count < 0:
            negativos.append("t_count")
        if negativos:
            raise MeshConfigError(f"parâmetros negativos: {', '.join(negativos)}")
        if self.mesh_seg_payload < 1 or self.max_segments < 1:
            raise MeshConfigError("mesh_seg_payload e max_segments devem ser positivos")
        if self.unsegmented_max >= self.mesh_seg_payload * self.max_segments:
            raise MeshConfigError("unsegmented_max deve ser menor que a capacidade segmentada")

    @classmethod
    def from_dict(cls, data):
        conhecidos = {f.name for f in fields(cls)}
        desconhecidos = sorted(set(data) - conhecidos)
        if desconhecidos:
            raise MeshConfigError(f"chaves desconhecidas: {', '.join(desconhecidos)}")
        return cls(**data)

    @property
    def max_payload(self):
        return self.mesh_seg_payload * self.max_segments

    def t_count_para(self, grupo):
        if self.t_count is not None:
            return self.t_count
        return T_COUNT_MULTICAST if grupo else T_COUNT_UNICAST

    def retries_para(self, grupo):
        return self.retries_multicast if grupo else self.retries_unicast
