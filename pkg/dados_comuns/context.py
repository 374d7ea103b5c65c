import threading
from contextlib import contextmanager

_local = threading.local()


def set_relogio(relogio):
    _local.relogio = relogio


def get_relogio():
    return getattr(_local, "relogio", None)


def set_no(nome):
    _local.no = nome


def get_no():
    return getattr(_local, "no", None)


@contextmanager
def relogio_ativo(relogio):
    """Instala o relógio virtual na thread atual para os registros de log."""
    prev = get_relogio()
    try:
        set_relogio(relogio)
        yield
    finally:
        set_relogio(prev)


@contextmanager
def no_ativo(nome):
    prev = get_no()
    try:
        set_no(nome)
        yield
    finally:
        set_no(prev)
