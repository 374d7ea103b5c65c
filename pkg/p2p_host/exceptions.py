from dados_comuns.exceptions import ErroOEC


class MultistreamEncodingError(ErroOEC, ValueError):
    """Identificador de protocolo vazio, com quebra de linha ou mensagem malformada."""


class NegotiationError(ErroOEC):
    """Negociação multistream encerrada sem protocolo comum."""

    def __init__(self, motivo, estagio=None):
        super().__init__(f"{estagio or 'negociação'}: {motivo}")
        self.motivo = motivo
        self.estagio = estagio


class HandshakeError(ErroOEC):
    """Handshake não produziu segredos iguais ou a identidade não confere."""


class SecureChannelError(ErroOEC):
    """Falha de autenticação, replay ou mensagem selada malformada."""


class MuxError(ErroOEC):
    """Quadro do multiplexador malformado."""


class StreamError(ErroOEC):
    """Operação inválida sobre um stream."""


class UnknownPeerError(ErroOEC, LookupError):
    """Peer ausente da tabela de roteamento."""


class ConnectionNotReady(ErroOEC):
    """Conexão fora da fase Ready."""
