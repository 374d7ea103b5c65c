from dados_comuns.exceptions import ErroOEC


class MeshConfigError(ErroOEC, ValueError):
    """Parâmetros de SAR inconsistentes."""


class MeshPayloadTooLarge(ErroOEC, ValueError):
    """Payload maior que segmentos × tamanho de segmento."""


class AddressCollisionError(ErroOEC):
    """Endereço unicast já provisionado na rede."""


class NotProvisionedError(ErroOEC):
    """Cliente ainda não provisionado."""
