from dados_comuns.exceptions import ErroOEC


class TransportError(ErroOEC):
    """Porta fechada ou falha de escrita no meio serial."""
