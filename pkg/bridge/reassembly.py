import logging
from dataclasses import dataclass, field

from frame_codec.codec import reassemble
from frame_codec.exceptions import FrameFormatError, LengthMismatchError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Delivered:
    source: int
    msg_id: int
    payload: bytes


@dataclass(frozen=True)
class ReassemblyTimeout:
    source: int
    msg_id: int
    recebidos: int
    seg_count: int


@dataclass(frozen=True)
class LengthMismatch:
    source: int
    msg_id: int


@dataclass(frozen=True)
class DuplicateConflict:
    source: int
    msg_id: int
    seg_index: int


@dataclass
class Parcial:
    seg_count: int
    started_at: int
    atualizado_em: int = None
    frames: dict = field(default_factory=dict)
    timer: object = None


class ReassemblyBuffer:
    """
    Mensagens parciais por (origem, msg_id). O prazo recomeça a cada quadro
    novo; uma entrada que passa o timeout inteiro sem quadro novo é descartada,
    mesmo que o quadro final já tenha chegado. Mensagens descartadas ficam
    marcadas até o fim do prazo para que segmentos atrasados não recriem a
    entrada.
    """

    def __init__(self, clock, timeout_us, on_event=None):
        self.clock = clock
        self.timeout_us = timeout_us
        self.on_event = on_event
        self.partial = {}
        self._descartadas = {}

    def __len__(self):
        return len(self.partial)

    def add(self, source, frame):
        """Retorna a lista de eventos produzidos pelo quadro."""
        chave = (source, frame.msg_id)
        if chave in self._descartadas:
            return []
        entrada = self.partial.get(chave)
        if entrada is None:
            entrada = Parcial(seg_count=frame.header.seg_count, started_at=self.clock.now_us())
            self.partial[chave] = entrada

        if frame.header.seg_count != entrada.seg_count:
            return [self._descartar(chave, DuplicateConflict(source, frame.msg_id, frame.seg_index))]

        anterior = entrada.frames.get(frame.seg_index)
        if anterior is not None:
            if anterior == frame:
                return []
            logger.warning(
                f"Segmento {frame.seg_index} da mensagem {frame.msg_id} de 0x{source:04X} "
                f"chegou com conteúdo diferente, mensagem descartada"
            )
            return [self._descartar(chave, DuplicateConflict(source, frame.msg_id, frame.seg_index))]
        entrada.frames[frame.seg_index] = frame

        if len(entrada.frames) < entrada.seg_count:
            self._armar(chave, entrada)
            return []
        try:
            payload = reassemble(entrada.frames.values())
        except (LengthMismatchError, FrameFormatError):
            logger.warning(f"Mensagem {frame.msg_id} de 0x{source:04X} com LENGTH divergente, descartada")
            return [self._descartar(chave, LengthMismatch(source, frame.msg_id))]
        self._remover(chave)
        return [Delivered(source, frame.msg_id, payload)]

    def clear(self):
        for chave in list(self.partial):
            self._remover(chave)
        self._descartadas.clear()

    def _remover(self, chave):
        entrada = self.partial.pop(chave, None)
        if entrada is not None and entrada.timer is not None:
            entrada.timer.cancel()
        return entrada

    def _descartar(self, chave, evento):
        entrada = self._remover(chave)
        inicio = entrada.atualizado_em if entrada and entrada.atualizado_em is not None else self.clock.now_us()
        restante = max(inicio + self.timeout_us - self.clock.now_us(), 0)
        self._descartadas[chave] = self.clock.call_later(restante, self._descartadas.pop, chave, None)
        return evento

    def _armar(self, chave, entrada):
        if entrada.timer is not None:
            entrada.timer.cancel()
        entrada.atualizado_em = self.clock.now_us()
        entrada.timer = self.clock.call_later(self.timeout_us, self._expirar, chave, entrada)

    def _expirar(self, chave, entrada):
        if self.partial.get(chave) is not entrada:
            return
        self.partial.pop(chave)
        evento = ReassemblyTimeout(chave[0], chave[1], len(entrada.frames), entrada.seg_count)
        logger.warning(
            f"Tempo de remontagem esgotado para a mensagem {chave[1]} de 0x{chave[0]:04X} "
            f"({evento.recebidos}/{evento.seg_count} segmentos)"
        )
        if self.on_event is not None:
            self.on_event(evento)
