from django.apps import AppConfig


class P2pHostConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'p2p_host'
    verbose_name = 'Host P2P'
