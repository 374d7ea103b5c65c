import logging
from collections import Counter, defaultdict

from dados_comuns.conf import oec_setting
from p2p_host.constants import FLOODSUB
from pubsub.exceptions import RecordFormatError
from pubsub.records import PubSubMessage, Subscription, decode_records, encode_record
from pubsub.seen_cache import SeenCache

logger = logging.getLogger(__name__)


class FloodSub:
    """
    Inundação de mensagens por tópico entre vizinhos diretos.

    Cada vizinho é representado por um stream com ``write(data, etiqueta)``
    e atributo ``on_data``. Com ``strict`` o repasse vai só aos vizinhos
    que anunciaram o tópico; sem ele vai a todos.
    """

    def __init__(self, peer_id, clock, strict=False, seen_ttl_s=None, seen_capacity=None):
        self.peer_id = str(peer_id)
        self.clock = clock
        self.strict = strict
        self.seen = SeenCache(clock, seen_ttl_s, seen_capacity)
        self.peers = {}
        self.topicos_peer = defaultdict(set)
        self.subscriptions = {}
        self.seqno = 0
        self.transmissoes = Counter()
        self.contadores = Counter()
        self.entregues = []

    @classmethod
    def attach(cls, host, **kwargs):
        """Instancia sobre um Host e registra o handler do protocolo."""
        kwargs.setdefault("strict", oec_setting("OEC_STRICT_FLOODSUB", False))
        floodsub = cls(host.peer_id, host.clock, **kwargs)
        host.set_stream_handler(FLOODSUB, floodsub.handle_stream)
        return floodsub

    def handle_stream(self, conn, stream):
        peer = str(conn.remote_peer)
        self.add_peer(peer, stream)
        conn.on_failed.append(lambda _conn, p=peer, s=stream: self.remove_peer(p, s))

    def add_peer(self, peer, stream):
        self.peers[peer] = stream
        self.topicos_peer[peer] = set()
        stream.on_data = lambda data, p=peer: self._on_data(p, data)
        if self.subscriptions:
            anuncio = b"".join(encode_record(Subscription(t)) for t in self.subscriptions)
            stream.write(anuncio)
        for data in getattr(stream, "recebido", ()):
            self._on_data(peer, data)
        logger.debug(f"floodsub {self.peer_id[:8]}: vizinho {peer[:8]} adicionado")

    def remove_peer(self, peer, stream=None):
        if stream is not None and self.peers.get(peer) is not stream:
            return
        self.peers.pop(peer, None)
        self.topicos_peer.pop(peer, None)

    def subscribe(self, topic, handler=None):
        novo = topic not in self.subscriptions
        if novo:
            self.subscriptions[topic] = []
            self._anunciar(Subscription(topic, True))
        if handler is not None:
            self.subscriptions[topic].append(handler)

    def unsubscribe(self, topic):
        if self.subscriptions.pop(topic, None) is not None:
            self._anunciar(Subscription(topic, False))

    def _anunciar(self, registro):
        raw = encode_record(registro)
        for stream in self.peers.values():
            stream.write(raw)

    def publish(self, topic, payload):
        self.seqno += 1
        msg = PubSubMessage(self.peer_id, self.seqno, topic, bytes(payload))
        self.seen.add(msg.key)
        self.contadores["publicadas"] += 1
        self._entregar(msg)
        self._encaminhar(msg, origem=None)
        return msg

    def on_pubsub_message(self, msg, origem=None):
        if not self.seen.add(msg.key):
            self.contadores["duplicadas"] += 1
            return
        self.contadores["recebidas"] += 1
        self._entregar(msg)
        self._encaminhar(msg, origem)

    def _entregar(self, msg):
        handlers = self.subscriptions.get(msg.topic)
        if handlers is None:
            return
        self.entregues.append(msg)
        for handler in handlers:
            handler(msg)

    def _encaminhar(self, msg, origem):
        raw = encode_record(msg)
        for peer, stream in self.peers.items():
            if peer == origem:
                continue
            if self.strict and msg.topic not in self.topicos_peer[peer]:
                continue
            stream.write(raw, etiqueta=msg.key)
            self.transmissoes[msg.key] += 1

    def _on_data(self, peer, data):
        try:
            registros = decode_records(data)
        except RecordFormatError as exc:
            logger.warning(f"floodsub {self.peer_id[:8]}: registro inválido de {peer[:8]}: {exc}")
            return
        for registro in registros:
            if isinstance(registro, Subscription):
                if registro.subscribe:
                    self.topicos_peer[peer].add(registro.topic)
                else:
                    self.topicos_peer[peer].discard(registro.topic)
            else:
                self.on_pubsub_message(registro, origem=peer)
