from dados_comuns.exceptions import ErroOEC


class ExperimentoError(ErroOEC):
    """Experimento sem condições de executar ou de gerar relatório."""
