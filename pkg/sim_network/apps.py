from django.apps import AppConfig


class SimNetworkConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sim_network'
    verbose_name = 'Simulação de rede a eventos discretos'
