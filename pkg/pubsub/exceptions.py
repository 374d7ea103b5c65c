from dados_comuns.exceptions import ErroOEC


class RecordFormatError(ErroOEC, ValueError):
    """Registro pubsub truncado ou de tipo desconhecido."""
