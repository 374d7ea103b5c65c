from dados_comuns.exceptions import ErroOEC


class PayloadSizeError(ErroOEC, ValueError):
    """Payload fora do intervalo aceito pelo Bridge."""


class FrameFormatError(ErroOEC, ValueError):
    """Quadro ou conjunto de quadros malformado."""


class IncompleteMessageError(ErroOEC):
    """Faltam segmentos para remontar a mensagem."""


class LengthMismatchError(ErroOEC):
    """O comprimento somado difere do campo LENGTH do segmento final."""
