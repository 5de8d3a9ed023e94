from rest_framework import serializers
from .models import ExperimentRun


class ExperimentRunSerializer(serializers.ModelSerializer):
    """Serializer for recorded command runs"""
    command_display = serializers.CharField(source='get_command_display', read_only=True)

    class Meta:
        model = ExperimentRun
        fields = [
            'id', 'command', 'command_display', 'config', 'output_format',
            'output_sha256', 'row_count', 'created_at',
        ]
        read_only_fields = fields
