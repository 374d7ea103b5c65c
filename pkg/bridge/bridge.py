import logging
import queue
from collections import deque
from dataclasses import dataclass, field

from bridge.exceptions import TransportError
from bridge.reassembly import Delivered, ReassemblyBuffer
from dados_comuns.conf import oec_setting
from dados_comuns.context import no_ativo
from dados_comuns.utils import ms_to_us
from frame_codec.codec import FrameError, FrameParser, Resync, SegmentFrame, encode_message

logger = logging.getLogger(__name__)

MSG_ID_MOD = 2 ** 32


@dataclass
class SendHandle:
    """Acompanha uma mensagem enviada: resolve quando o último byte sai."""

    msg_id: int
    dst: int
    n_frames: int
    n_bytes: int
    enqueued_at: int
    etiquetas: tuple = ()
    first_write_at: int = None
    last_write_at: int = None
    done_at: int = None
    erro: Exception = None
    _callbacks: list = field(default_factory=list, repr=False)

    @property
    def done(self):
        return self.done_at is not None or self.erro is not None

    def add_done_callback(self, fn):
        if self.done:
            fn(self)
        else:
            self._callbacks.append(fn)

    def _resolver(self, done_at=None, erro=None):
        self.done_at = done_at
        self.erro = erro
        callbacks, self._callbacks = self._callbacks, []
        for fn in callbacks:
            fn(self)


@dataclass
class BridgeOutput:
    deliveries: list = field(default_factory=list)
    events: list = field(default_factory=list)


class Bridge:
    """
    Liga o host P2P ao transporte mesh por uma porta duplex de bytes.
    Na saída os quadros de cada mensagem são escritos com um intervalo
    mínimo entre inícios de escrita; na entrada os quadros são remontados
    por (origem, msg_id).
    """

    def __init__(
        self,
        port,
        clock,
        inter_segment_delay_ms=None,
        reassembly_timeout_ms=None,
        on_deliver=None,
        on_event=None,
        nome="",
    ):
        if inter_segment_delay_ms is None:
            inter_segment_delay_ms = oec_setting("OEC_BRIDGE_DELAY_MS", 60)
        if reassembly_timeout_ms is None:
            reassembly_timeout_ms = oec_setting("OEC_REASSEMBLY_TIMEOUT_MS", 10_000)
        self.port = port
        self.clock = clock
        self.nome = nome
        self.on_deliver = on_deliver
        self.on_event = on_event
        self.entregues = queue.Queue()
        self._delay_us = 0
        self.set_inter_segment_delay(inter_segment_delay_ms)
        self._parser = FrameParser()
        self.reassembly = ReassemblyBuffer(clock, ms_to_us(reassembly_timeout_ms), on_event=self._emitir)
        self._fila = deque()
        self._escritor_agendado = False
        self._proxima_escrita_us = 0
        self._msg_id = 1
        port.set_receiver(self.bridge_on_bytes)

    @property
    def inter_segment_delay_us(self):
        return self._delay_us

    @property
    def pendente(self):
        return bool(self._fila)

    def set_inter_segment_delay(self, ms):
        if ms < 0:
            raise ValueError(f"intervalo entre segmentos negativo: {ms}")
        self._delay_us = ms_to_us(ms)

    def _proximo_msg_id(self):
        msg_id = self._msg_id
        self._msg_id = (self._msg_id + 1) % MSG_ID_MOD
        return msg_id

    def bridge_send(self, payload, dst, etiquetas=()):
        if not self.port.is_open:
            raise TransportError(f"Bridge {self.nome}: porta fechada")
        msg_id = self._proximo_msg_id()
        frames = encode_message(payload, dst, msg_id)
        handle = SendHandle(
            msg_id=msg_id,
            dst=dst,
            n_frames=len(frames),
            n_bytes=len(payload),
            enqueued_at=self.clock.now_us(),
            etiquetas=tuple(etiquetas),
        )
        self._fila.append((handle, deque(frames)))
        logger.debug(f"Bridge {self.nome}: mensagem {msg_id} para 0x{dst:04X} com {len(frames)} segmentos")
        self._agendar_escritor()
        return handle

    def _agendar_escritor(self):
        if self._escritor_agendado or not self._fila:
            return
        self._escritor_agendado = True
        espera = max(self._proxima_escrita_us - self.clock.now_us(), 0)
        self.clock.call_later(espera, self._escrever)

    def _escrever(self):
        self._escritor_agendado = False
        if not self._fila:
            return
        handle, frames = self._fila[0]
        agora = self.clock.now_us()
        try:
            fim = self.port.write(frames.popleft())
        except TransportError as exc:
            self._falhar_fila(exc)
            return
        if handle.first_write_at is None:
            handle.first_write_at = agora
        handle.last_write_at = agora
        self._proxima_escrita_us = agora + self._delay_us
        if not frames:
            self._fila.popleft()
            self.clock.call_later(max(fim - agora, 0), handle._resolver, fim)
        self._agendar_escritor()

    def _falhar_fila(self, exc):
        logger.warning(f"Bridge {self.nome}: {exc}; {len(self._fila)} mensagens descartadas")
        fila, self._fila = self._fila, deque()
        for handle, _ in fila:
            handle._resolver(erro=exc)

    def bridge_on_bytes(self, chunk):
        saida = BridgeOutput()
        for evento in self._parser.feed(chunk):
            if isinstance(evento, SegmentFrame):
                for resultado in self.reassembly.add(evento.address, evento):
                    if isinstance(resultado, Delivered):
                        saida.deliveries.append(resultado)
                    else:
                        saida.events.append(resultado)
            else:
                if isinstance(evento, FrameError):
                    logger.warning(f"Bridge {self.nome}: quadro com erro ({evento.reason})")
                elif isinstance(evento, Resync):
                    logger.debug(f"Bridge {self.nome}: resincronizado após {evento.skipped} bytes")
                saida.events.append(evento)
        for entrega in saida.deliveries:
            if self.on_deliver is None:
                self.entregues.put(entrega)
                continue
            with no_ativo(self.nome or None):
                self.on_deliver(entrega.source, entrega.payload)
        for evento in saida.events:
            self._emitir(evento)
        return saida

    def _emitir(self, evento):
        if self.on_event is not None:
            self.on_event(evento)

    def close(self):
        self.port.close()
        self.reassembly.clear()
        self._parser = FrameParser()
        self._falhar_fila(TransportError(f"Bridge {self.nome} encerrado"))

    def reopen(self):
        """Reabre uma porta em memória depois de uma saída de nó."""
        reopen = getattr(self.port, "reopen", None)
        if reopen is None:
            raise TransportError("porta não pode ser reaberta")
        reopen()
        self._proxima_escrita_us = self.clock.now_us()
