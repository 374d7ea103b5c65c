# identificadores de protocolo (bit a bit no fio)

MULTISTREAM = "/multistream/1.0.0"
NOISE = "/noise"
TLS = "/tls/1.0.0"
YAMUX = "/yamux/1.0.0"
FLOODSUB = "/floodsub/1.0.0"
NA = "na"

SECURITY_PROPOSALS = (TLS, NOISE)
SECURITY_SUPPORTED = (NOISE,)
MUXER_PROPOSALS = (YAMUX,)
MUXER_SUPPORTED = (YAMUX,)

# prefixo de 1 byte das mensagens do host no Bridge

TAG_PRESENCA = b"D"
TAG_PRESENCA_RESPOSTA = b"d"
TAG_HELLO = b"P"
TAG_HELLO_RESPOSTA = b"p"
TAG_RAW = b"R"
TAG_HANDSHAKE = b"H"
TAG_SELADO = b"S"

TAGS = (
    (TAG_PRESENCA, "Presença"),
    (TAG_PRESENCA_RESPOSTA, "Resposta de presença"),
    (TAG_HELLO, "Hello com peer ID"),
    (TAG_HELLO_RESPOSTA, "Resposta ao hello"),
    (TAG_RAW, "Multistream em claro"),
    (TAG_HANDSHAKE, "Handshake"),
    (TAG_SELADO, "Selado"),
)

# fases da conexão (avançam nesta ordem)

IDLE = "Idle"
PEER_EXCHANGED = "PeerExchanged"
MULTISTREAM_AGREED = "MultistreamAgreed"
SECURED = "Secured"
MUXED = "Muxed"
READY = "Ready"
FAILED = "Failed"

FASES = (IDLE, PEER_EXCHANGED, MULTISTREAM_AGREED, SECURED, MUXED, READY)

# estágios de falha

ESTAGIO_PEER = "peer"
ESTAGIO_SECURITY = "security"
ESTAGIO_HANDSHAKE = "handshake"
ESTAGIO_MUXER = "muxer"
ESTAGIO_PUBSUB = "pubsub"
ESTAGIO_SECURE_CHANNEL = "secure_channel"
ESTAGIO_CONNECT = "connect"
ESTAGIO_ENCERRADA = "closed"

# limites

MAX_BRIDGE_PAYLOAD = 2000
NONCE_LEN = 8
TAG_AEAD_LEN = 16
MAX_SELADO_PLAINTEXT = MAX_BRIDGE_PAYLOAD - len(TAG_SELADO) - NONCE_LEN - TAG_AEAD_LEN
