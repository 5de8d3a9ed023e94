from django.contrib import admin
from .models import ExperimentRun


@admin.register(ExperimentRun)
class ExperimentRunAdmin(admin.ModelAdmin):
    list_display = ['command', 'output_format', 'row_count', 'output_sha256', 'created_at']
    list_filter = ['command', 'output_format', 'created_at']
    search_fields = ['command', 'output_sha256']
    readonly_fields = ['config', 'output_sha256', 'row_count', 'created_at']
