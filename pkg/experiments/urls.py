from django.urls import path
from .views import run_list, run_detail

app_name = 'experiments'

urlpatterns = [
    path('runs/', run_list, name='run_list'),
    path('runs/<int:run_id>/', run_detail, name='run_detail'),
]
