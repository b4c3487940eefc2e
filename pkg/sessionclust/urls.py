from django.urls import path

from . import views

urlpatterns = [
    path('cluster/', views.cluster_endpoint, name='cluster_endpoint'),
    path('evaluate/', views.evaluate_endpoint, name='evaluate_endpoint'),
]
