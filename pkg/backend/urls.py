"""URL configuration: the admin site and the session clustering API under /api/."""
from django.contrib import admin
from django.urls import include, path

urlpatterns = [
    path('admin/', admin.site.urls),
    path('api/', include('sessionclust.urls')),
]
