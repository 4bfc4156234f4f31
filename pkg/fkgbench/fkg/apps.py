from django.apps import AppConfig


class FkgConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'fkg'
