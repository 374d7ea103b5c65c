"""
Quadro serial do Bridge.

Layout no fio (big-endian):

    HEADER(13) | DST(6) | START "<<" | DATA(1-227, hex) | [LENGTH(4) | END ">>>"]

LENGTH e END só aparecem no segmento final. O HEADER é
version(1) msg_id(4) seg_index(2) seg_count(2) data_len(2) flags(1) reserved(1).
"""
import logging
import re
import struct
from dataclasses import dataclass

from frame_codec.constants import (
    DST_LEN,
    END_MARKER,
    FLAG_FINAL,
    HEADER_LEN,
    HEX_ALPHABET,
    LENGTH_LEN,
    MAX_DATA,
    MAX_PAYLOAD,
    MIN_PAYLOAD,
    START_MARKER,
    VERSAO,
)
from frame_codec.exceptions import (
    FrameFormatError,
    IncompleteMessageError,
    LengthMismatchError,
    PayloadSizeError,
)

logger = logging.getLogger(__name__)

HEADER_STRUCT = struct.Struct(">BIHHHBB")
LENGTH_STRUCT = struct.Struct(">I")
DST_RE = re.compile(rb"^0x[0-9A-F]{4}$")

PREFIX_LEN = HEADER_LEN + DST_LEN + len(START_MARKER)
TRAILER_LEN = LENGTH_LEN + len(END_MARKER)


@dataclass(frozen=True)
class MessageHeader:
    version: int
    msg_id: int
    seg_index: int
    seg_count: int
    data_len: int
    flags: int
    reserved: int = 0

    @property
    def is_final(self):
        return bool(self.flags & FLAG_FINAL)

    def pack(self):
        return HEADER_STRUCT.pack(
            self.version,
            self.msg_id,
            self.seg_index,
            self.seg_count,
            self.data_len,
            self.flags,
            self.reserved,
        )

    @classmethod
    def unpack(cls, data):
        return cls(*HEADER_STRUCT.unpack(bytes(data[:HEADER_LEN])))

    def plausivel(self):
        return (
            self.version == VERSAO
            and self.reserved == 0
            and self.flags & ~FLAG_FINAL == 0
            and 1 <= self.seg_count
            and self.seg_index < self.seg_count
            and 1 <= self.data_len <= MAX_DATA
            and self.is_final == (self.seg_index == self.seg_count - 1)
        )


@dataclass(frozen=True)
class SegmentFrame:
    """Um quadro do fio. total_len só existe no segmento final."""

    header: MessageHeader
    dst: bytes
    data: bytes
    total_len: int = None

    @property
    def msg_id(self):
        return self.header.msg_id

    @property
    def seg_index(self):
        return self.header.seg_index

    @property
    def is_final(self):
        return self.header.is_final

    @property
    def address(self):
        return decode_dst(self.dst)

    def serialize(self):
        partes = [self.header.pack(), self.dst, START_MARKER, self.data]
        if self.header.is_final:
            partes.append(LENGTH_STRUCT.pack(self.total_len))
            partes.append(END_MARKER)
        return b"".join(partes)

    def __len__(self):
        return PREFIX_LEN + len(self.data) + (TRAILER_LEN if self.is_final else 0)

    def with_dst(self, address):
        """Cópia do quadro com DST trocado (o adaptador grava a origem aqui)."""
        return SegmentFrame(self.header, encode_dst(address), self.data, self.total_len)


@dataclass(frozen=True)
class Resync:
    skipped: int


@dataclass(frozen=True)
class FrameError:
    reason: str
    msg_id: int = None


def encode_dst(address):
    if not 0 <= address <= 0xFFFF:
        raise FrameFormatError(f"endereço mesh inválido: {address}")
    return b"0x%04X" % address


def decode_dst(dst):
    if not DST_RE.match(bytes(dst)):
        raise FrameFormatError(f"DST inválido: {bytes(dst)!r}")
    return int(bytes(dst[2:]), 16)


def hex_encode(payload):
    if not payload:
        raise PayloadSizeError("payload vazio não pode ser codificado")
    return bytes(payload).hex().upper().encode("ascii")


def hex_decode(data):
    if len(data) % 2:
        raise FrameFormatError("hexadecimal com comprimento ímpar")
    return bytes.fromhex(bytes(data).decode("ascii"))


def build_frames(payload, dst, msg_id):
    if not MIN_PAYLOAD <= len(payload) <= MAX_PAYLOAD:
        raise PayloadSizeError(
            f"payload de {len(payload)} bytes fora do intervalo [{MIN_PAYLOAD}, {MAX_PAYLOAD}]"
        )
    hexa = hex_encode(payload)
    dst_bytes = encode_dst(dst)
    chunks = [hexa[i:i + MAX_DATA] for i in range(0, len(hexa), MAX_DATA)]
    total = len(chunks)
    frames = []
    for index, chunk in enumerate(chunks):
        final = index == total - 1
        header = MessageHeader(
            version=VERSAO,
            msg_id=msg_id,
            seg_index=index,
            seg_count=total,
            data_len=len(chunk),
            flags=FLAG_FINAL if final else 0,
        )
        frames.append(SegmentFrame(header, dst_bytes, chunk, len(hexa) if final else None))
    return frames


def encode_message(payload, dst, msg_id):
    """Segmenta o payload em quadros seriais de no máximo 255 bytes."""
    return [frame.serialize() for frame in build_frames(payload, dst, msg_id)]


class FrameParser:
    """
    Parser incremental, indiferente às fronteiras dos pedaços recebidos.
    Bytes que não formam um quadro plausível são descartados um a um.
    """

    def __init__(self):
        self._buf = bytearray()
        self._descartados = 0

    @property
    def pendente(self):
        return len(self._buf)

    def feed(self, chunk):
        self._buf.extend(chunk)
        eventos = []
        while True:
            resultado = self._proximo()
            if resultado is None:
                break
            if isinstance(resultado, int):
                self._descartar(resultado)
                continue
            if self._descartados:
                eventos.append(Resync(self._descartados))
                self._descartados = 0
            eventos.append(resultado)
        return eventos

    def _descartar(self, n):
        del self._buf[:n]
        self._descartados += n

    def _proximo(self):
        """Quadro, FrameError, nº de bytes a descartar, ou None se faltam bytes."""
        buf = self._buf
        if len(buf) < HEADER_LEN:
            return None
        header = MessageHeader.unpack(buf)
        if not header.plausivel():
            return 1
        if len(buf) < PREFIX_LEN:
            return None
        dst = bytes(buf[HEADER_LEN:HEADER_LEN + DST_LEN])
        marcador = bytes(buf[HEADER_LEN + DST_LEN:PREFIX_LEN])
        if marcador != START_MARKER or not DST_RE.match(dst):
            return 1
        fim_dados = PREFIX_LEN + header.data_len
        if len(buf) < fim_dados:
            return None
        data = bytes(buf[PREFIX_LEN:fim_dados])
        if not all(b in HEX_ALPHABET for b in data):
            return 1
        total_len = None
        fim = fim_dados
        if header.is_final:
            fim = fim_dados + TRAILER_LEN
            if len(buf) < fim:
                return None
            (total_len,) = LENGTH_STRUCT.unpack(bytes(buf[fim_dados:fim_dados + LENGTH_LEN]))
            if bytes(buf[fim_dados + LENGTH_LEN:fim]) != END_MARKER:
                logger.warning(f"Marcador final inválido na mensagem {header.msg_id}")
                del buf[:1]
                return FrameError("end_marker", header.msg_id)
        del buf[:fim]
        return SegmentFrame(header, dst, data, total_len)


def parse_stream(stream, on_event=None):
    """
    Gera os quadros de uma fonte incremental de bytes (um bytes ou um
    iterável de pedaços). Eventos de erro e resincronização vão para on_event.
    """
    if isinstance(stream, (bytes, bytearray, memoryview)):
        stream = [bytes(stream)]
    parser = FrameParser()
    for chunk in stream:
        for evento in parser.feed(chunk):
            if isinstance(evento, SegmentFrame):
                yield evento
            elif on_event is not None:
                on_event(evento)


def reassemble(frames):
    """Remonta o payload de um conjunto de quadros de um mesmo msg_id."""
    frames = list(frames)
    if not frames:
        raise IncompleteMessageError("nenhum segmento recebido")
    msg_ids = {frame.msg_id for frame in frames}
    if len(msg_ids) != 1:
        raise FrameFormatError(f"quadros de mensagens diferentes: {sorted(msg_ids)}")
    seg_count = frames[0].header.seg_count
    por_indice = {}
    for frame in frames:
        if frame.header.seg_count != seg_count:
            raise FrameFormatError("seg_count divergente entre segmentos")
        if frame.seg_index in por_indice:
            raise FrameFormatError(f"segmento {frame.seg_index} duplicado")
        por_indice[frame.seg_index] = frame
    faltando = [i for i in range(seg_count) if i not in por_indice]
    if faltando:
        raise IncompleteMessageError(
            f"mensagem {frames[0].msg_id} incompleta, faltam segmentos {faltando}"
        )
    hexa = b"".join(por_indice[i].data for i in range(seg_count))
    final = por_indice[seg_count - 1]
    if len(hexa) != final.total_len:
        raise LengthMismatchError(
            f"mensagem {final.msg_id}: {len(hexa)} bytes recebidos, LENGTH={final.total_len}"
        )
    return hex_decode(hexa)
