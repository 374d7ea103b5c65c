from django.conf import settings


def oec_setting(name, default):
    """Lê um setting OEC_*; sem Django configurado devolve o default."""
    if not settings.configured:
        return default
    return getattr(settings, name, default)
