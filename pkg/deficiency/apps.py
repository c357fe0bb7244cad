from django.apps import AppConfig


class DeficiencyConfig(AppConfig):
    default_auto_field = "django.db.models.BigAutoField"
    name = "deficiency"
    verbose_name = "Le Cam deficiency toolkit"
