from django.urls import path
from .views import phase_error, optimal_interaction

app_name = 'formulas'

urlpatterns = [
    path('phase-error/', phase_error, name='phase-error'),
    path('optimal-xi/', optimal_interaction, name='optimal-xi'),
]
