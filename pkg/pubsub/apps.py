from django.apps import AppConfig


class PubsubConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'pubsub'
    verbose_name = 'Publicação e assinatura (FloodSub)'
