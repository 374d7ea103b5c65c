from django.apps import AppConfig


class FrameCodecConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'frame_codec'
    verbose_name = 'Codificação de quadros do Bridge'
