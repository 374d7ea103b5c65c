from .base import *
from .base import env

# https://docs.djangoproject.com/en/dev/ref/settings/#debug

DEBUG = env('DJANGO_DEBUG', default=True)
