"""
Multiplexador de streams sobre o canal selado.

Quadro: ``uvarint(stream_id) || flags(1) || uvarint(len) || dados``.
O stream 0 é de controle (ping/pong). Escritas maiores que
``max_dados(stream_id)`` são fragmentadas com MORE/CONT; o receptor só entrega
a escrita inteira e descarta cadeias incompletas.
"""
import logging
from dataclasses import dataclass

from dados_comuns.utils import VarintIncompleto, decode_uvarint, encode_uvarint
from p2p_host.constants import MAX_SELADO_PLAINTEXT
from p2p_host.exceptions import MuxError, NegotiationError, StreamError
from p2p_host.multistream import MultistreamDialer, MultistreamListener

logger = logging.getLogger(__name__)

SYN = 0x01
FIN = 0x02
DATA = 0x04
MORE = 0x08
CONT = 0x10
PING = 0x20
ACK = 0x40

STREAM_CONTROLE = 0


@dataclass(frozen=True)
class MuxFrame:
    stream_id: int
    flags: int
    data: bytes = b""

    def encode(self):
        return encode_uvarint(self.stream_id) + bytes([self.flags]) + encode_uvarint(len(self.data)) + self.data

    def __len__(self):
        return len(self.encode())


def decode_frames(buf):
    quadros = []
    i = 0
    try:
        while i < len(buf):
            stream_id, i = decode_uvarint(buf, i)
            if i >= len(buf):
                raise MuxError("quadro truncado antes das flags")
            flags = buf[i]
            tamanho, i = decode_uvarint(buf, i + 1)
            if i + tamanho > len(buf):
                raise MuxError(f"quadro truncado: {tamanho} bytes declarados, {len(buf) - i} disponíveis")
            quadros.append(MuxFrame(stream_id, flags, bytes(buf[i:i + tamanho])))
            i += tamanho
    except VarintIncompleto as exc:
        raise MuxError("varint truncado no quadro do multiplexador") from exc
    return quadros


def max_dados(stream_id):
    """Maior pedaço de dados cujo quadro ainda cabe numa mensagem selada."""
    cabecalho = len(encode_uvarint(stream_id)) + 1 + len(encode_uvarint(MAX_SELADO_PLAINTEXT))
    return MAX_SELADO_PLAINTEXT - cabecalho


def fragmentar(stream_id, data, flags_extra=0):
    """Quadros DATA de uma escrita; o primeiro recebe ``flags_extra``."""
    limite = max_dados(stream_id)
    pedacos = [data[i:i + limite] for i in range(0, len(data), limite)] or [b""]
    quadros = []
    for n, pedaco in enumerate(pedacos):
        flags = DATA
        if n == 0:
            flags |= flags_extra
        else:
            flags |= CONT
        if n < len(pedacos) - 1:
            flags |= MORE
        quadros.append(MuxFrame(stream_id, flags, bytes(pedaco)))
    return quadros


class MuxStream:
    def __init__(self, muxer, stream_id, local, negociador):
        self.muxer = muxer
        self.id = stream_id
        self.local = local
        self.negociador = negociador
        self.protocol = None
        self.aberto = False
        self.fechado_local = False
        self.fechado_remoto = False
        self.on_data = None
        self.on_close = None
        self.recebido = []
        self._fragmentos = None
        self._pendentes = []

    def __repr__(self):
        return f"<MuxStream {self.id} {self.protocol or 'negociando'}>"

    def write(self, data, etiqueta=None):
        if self.fechado_local:
            raise StreamError(f"stream {self.id} já fechado")
        if not self.aberto:
            self._pendentes.append((bytes(data), etiqueta))
            return
        self.muxer._escrever(self.id, bytes(data), etiqueta=etiqueta)

    def close(self):
        if self.fechado_local:
            return
        self.fechado_local = True
        self.muxer._enviar(MuxFrame(self.id, FIN))
        self.muxer._talvez_remover(self)

    def _entregar(self, data):
        if self.on_data is not None:
            self.on_data(data)
        else:
            self.recebido.append(data)


class Muxer:
    """
    ``enviar(quadro, etiqueta)`` recebe os quadros de saída; quem usa o
    muxer decide como agrupá-los em mensagens seladas.
    """

    def __init__(self, iniciador, enviar, protocols=(), on_stream_open=None, on_stream_failed=None, on_pong=None):
        self.iniciador = iniciador
        self._enviar_quadro = enviar
        self.protocols = protocols
        self.on_stream_open = on_stream_open
        self.on_stream_failed = on_stream_failed
        self.on_pong = on_pong
        self.streams = {}
        self._proximo_id = 1 if iniciador else 2

    def _enviar(self, quadro, etiqueta=None):
        self._enviar_quadro(quadro, etiqueta)

    def _escrever(self, stream_id, data, flags_extra=0, etiqueta=None):
        for quadro in fragmentar(stream_id, data, flags_extra):
            self._enviar(quadro, etiqueta)

    def open_stream(self, protocol_id):
        stream_id = self._proximo_id
        self._proximo_id += 2
        dialer = MultistreamDialer([protocol_id])
        stream = MuxStream(self, stream_id, True, dialer)
        self.streams[stream_id] = stream
        self._escrever(stream_id, dialer.start(), flags_extra=SYN)
        logger.debug(f"stream {stream_id} aberto para {protocol_id}")
        return stream

    def ping(self, data):
        self._enviar(MuxFrame(STREAM_CONTROLE, PING, bytes(data)))

    def receive(self, plaintext):
        for quadro in decode_frames(plaintext):
            self._processar(quadro)

    def on_gap(self):
        for stream in self.streams.values():
            if stream._fragmentos is not None:
                logger.info(f"stream {stream.id}: escrita fragmentada descartada após lacuna")
                stream._fragmentos = None

    def _remoto(self, stream_id):
        return (stream_id % 2 == 0) == self.iniciador

    def _processar(self, quadro):
        if quadro.stream_id == STREAM_CONTROLE:
            self._controle(quadro)
            return
        stream = self.streams.get(quadro.stream_id)
        if quadro.flags & SYN and stream is None:
            if not self._remoto(quadro.stream_id):
                raise MuxError(f"SYN com id {quadro.stream_id} da paridade local")
            listener = MultistreamListener(tuple(self.protocols))
            stream = MuxStream(self, quadro.stream_id, False, listener)
            self.streams[quadro.stream_id] = stream
            self._escrever(stream.id, listener.start())
        if stream is None:
            logger.debug(f"quadro para stream desconhecido {quadro.stream_id} ignorado")
            return
        if quadro.flags & DATA:
            self._dados(stream, quadro)
        if quadro.flags & FIN:
            stream.fechado_remoto = True
            if stream.on_close is not None:
                stream.on_close(stream)
            self._talvez_remover(stream)

    def _controle(self, quadro):
        if not quadro.flags & PING:
            return
        if quadro.flags & ACK:
            if self.on_pong is not None:
                self.on_pong(quadro.data)
        else:
            self._enviar(MuxFrame(STREAM_CONTROLE, PING | ACK, quadro.data))

    def _dados(self, stream, quadro):
        if quadro.flags & CONT:
            if stream._fragmentos is None:
                logger.debug(f"stream {stream.id}: continuação sem início descartada")
                return
            stream._fragmentos += quadro.data
        else:
            if stream._fragmentos is not None:
                logger.info(f"stream {stream.id}: escrita fragmentada incompleta descartada")
            stream._fragmentos = bytearray(quadro.data)
        if quadro.flags & MORE:
            return
        mensagem = bytes(stream._fragmentos)
        stream._fragmentos = None
        if stream.aberto:
            stream._entregar(mensagem)
        else:
            self._negociar(stream, mensagem)

    def _negociar(self, stream, data):
        try:
            saida, resto = stream.negociador.feed(data)
        except NegotiationError as exc:
            logger.warning(f"stream {stream.id}: negociação falhou ({exc.motivo})")
            del self.streams[stream.id]
            if self.on_stream_failed is not None:
                self.on_stream_failed(stream, exc)
            return
        if saida:
            self._escrever(stream.id, saida)
        if stream.negociador.selected is None:
            return
        stream.protocol = stream.negociador.selected
        stream.aberto = True
        for pendente, etiqueta in stream._pendentes:
            self._escrever(stream.id, pendente, etiqueta=etiqueta)
        stream._pendentes.clear()
        if self.on_stream_open is not None:
            self.on_stream_open(stream)
        if resto:
            stream._entregar(resto)

    def _talvez_remover(self, stream):
        if stream.fechado_local and stream.fechado_remoto:
            self.streams.pop(stream.id, None)
