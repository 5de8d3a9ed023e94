"""
URL configuration for the qndmetrology project.

Only the calculation API is routed; the command-line front end lives in
``experiments/management/commands``.
"""
from django.contrib import admin
from django.urls import path, include

urlpatterns = [
    path('admin/', admin.site.urls),

    # API Routes
    path('api/formulas/', include('formulas.urls')),  # Closed-form phase errors
    path('api/experiments/', include('experiments.urls')),  # Recorded CLI runs
]
