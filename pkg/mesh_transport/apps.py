from django.apps import AppConfig


class MeshTransportConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'mesh_transport'
    verbose_name = 'Transporte Bluetooth Mesh simulado'
