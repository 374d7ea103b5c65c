from dados_comuns.exceptions import ErroOEC


class PastEventError(ErroOEC):
    """Evento agendado para antes do relógio virtual."""


class ScenarioConfigError(ErroOEC):
    """Arquivo de cenário inválido ou inconsistente."""
