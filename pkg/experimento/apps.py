from django.apps import AppConfig


class ExperimentoConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'experimento'
    verbose_name = 'Experimentos'
