from django.apps import AppConfig


class SessionclustConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'sessionclust'
    verbose_name = 'Web session clustering'
