"""
Registros do stream /floodsub/1.0.0, cada um prefixado pelo tamanho:

    kind(1) || uvarint(len topic) || topic
    MSG: ... || uvarint(len src) || src || seqno(8, BE) || uvarint(len payload) || payload
"""
import struct
from dataclasses import dataclass

from dados_comuns.utils import length_prefixed, read_length_prefixed
from pubsub.exceptions import RecordFormatError

SUB = 0x01
UNSUB = 0x02
MSG = 0x03

SEQNO = struct.Struct(">Q")


@dataclass(frozen=True)
class PubSubMessage:
    source: str
    seqno: int
    topic: str
    payload: bytes

    @property
    def key(self):
        return (self.source, self.seqno)


@dataclass(frozen=True)
class Subscription:
    topic: str
    subscribe: bool = True


def encode_record(registro):
    if isinstance(registro, PubSubMessage):
        corpo = (
            bytes([MSG])
            + length_prefixed(registro.topic.encode("utf-8"))
            + length_prefixed(registro.source.encode("utf-8"))
            + SEQNO.pack(registro.seqno)
            + length_prefixed(registro.payload)
        )
    else:
        kind = SUB if registro.subscribe else UNSUB
        corpo = bytes([kind]) + length_prefixed(registro.topic.encode("utf-8"))
    return length_prefixed(corpo)


def _decode_corpo(corpo):
    if not corpo:
        raise RecordFormatError("registro vazio")
    kind = corpo[0]
    topic, i = read_length_prefixed(corpo, 1)
    topic = topic.decode("utf-8")
    if kind in (SUB, UNSUB):
        if i != len(corpo):
            raise RecordFormatError("bytes sobrando em registro de assinatura")
        return Subscription(topic, kind == SUB)
    if kind != MSG:
        raise RecordFormatError(f"tipo de registro desconhecido: {kind}")
    source, i = read_length_prefixed(corpo, i)
    if i + SEQNO.size > len(corpo):
        raise RecordFormatError("seqno truncado")
    (seqno,) = SEQNO.unpack_from(corpo, i)
    payload, i = read_length_prefixed(corpo, i + SEQNO.size)
    if i != len(corpo):
        raise RecordFormatError("bytes sobrando em registro de mensagem")
    return PubSubMessage(source.decode("utf-8"), seqno, topic, payload)


def decode_records(data):
    registros = []
    i = 0
    try:
        while i < len(data):
            corpo, i = read_length_prefixed(data, i)
            registros.append(_decode_corpo(corpo))
    except RecordFormatError:
        raise
    except ValueError as exc:
        raise RecordFormatError(f"registro malformado: {exc}") from exc
    return registros
