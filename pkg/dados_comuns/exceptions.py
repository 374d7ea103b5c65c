class ErroOEC(Exception):
    """Raiz das exceções da pilha de comunicação oportunista."""
