from dataclasses import dataclass

from mesh_transport.constants import GROUP, GROUP_BASE, UNICAST, UNICAST_MAX, UNICAST_MIN


@dataclass(frozen=True, order=True)
class MeshAddress:
    value: int

    def __post_init__(self):
        if not 0 <= self.value <= 0xFFFF:
            raise ValueError(f"endereço mesh fora de 16 bits: {self.value}")

    @classmethod
    def parse(cls, valor):
        """Aceita int ou texto como "0x0027"."""
        if isinstance(valor, MeshAddress):
            return valor
        if isinstance(valor, str):
            return cls(int(valor, 0))
        return cls(int(valor))

    @property
    def kind(self):
        return GROUP if self.value >= GROUP_BASE else UNICAST

    @property
    def is_group(self):
        return self.kind == GROUP

    @property
    def is_unicast(self):
        return UNICAST_MIN <= self.value <= UNICAST_MAX

    def __int__(self):
        return self.value

    def __str__(self):
        return f"0x{self.value:04X}"


def is_group(address):
    return int(address) >= GROUP_BASE
