import dataclasses
from dataclasses import dataclass

from dados_comuns.utils import ms_to_us
from sim_network.exceptions import ScenarioConfigError


@dataclass(frozen=True)
class LinkModel:
    """Parâmetros de um enlace de rádio; a calibração vem do cenário."""

    base_latency_ms: float = 5.0
    jitter_ms: float = 0.0
    loss_p: float = 0.0
    max_range_m: float = 100.0
    distance_m: float = 0.0

    def __post_init__(self):
        if not 0.0 <= self.loss_p <= 1.0:
            raise ScenarioConfigError(f"loss_p fora de [0, 1]: {self.loss_p}")
        if self.base_latency_ms < 0 or self.jitter_ms < 0:
            raise ScenarioConfigError("latência e jitter devem ser não negativos")
        if self.max_range_m < 0 or self.distance_m < 0:
            raise ScenarioConfigError("alcance e distância devem ser não negativos")

    @property
    def in_range(self):
        return self.distance_m <= self.max_range_m

    def com(self, **kwargs):
        return dataclasses.replace(self, **kwargs)


@dataclass(frozen=True)
class LinkDelivered:
    latency_us: int


@dataclass(frozen=True)
class LinkLost:
    motivo: str


FORA_DE_ALCANCE = LinkLost("fora_de_alcance")
PERDA = LinkLost("perda")


def link_transmit(frame, link, rng):
    """
    Uma transmissão pelo enlace. Sempre consome dois sorteios do gerador
    (perda e jitter) quando o enlace está no alcance.
    """
    if not link.in_range:
        return FORA_DE_ALCANCE
    perda, sorteio_jitter = rng.random(2)
    if perda < link.loss_p:
        return PERDA
    jitter = (2.0 * sorteio_jitter - 1.0) * link.jitter_ms
    return LinkDelivered(ms_to_us(max(link.base_latency_ms + jitter, 0.0)))
