from django.shortcuts import get_object_or_404
from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response

from .models import ExperimentRun
from .serializers import ExperimentRunSerializer


@api_view(['GET'])
def run_list(request):
    """
    List recorded runs, newest first
    GET /api/experiments/runs/
    GET /api/experiments/runs/?command=qnd_formulas
    """
    runs = ExperimentRun.objects.all()
    command = request.query_params.get('command')
    if command:
        runs = runs.filter(command=command)
    serializer = ExperimentRunSerializer(runs, many=True)
    return Response(serializer.data, status=status.HTTP_200_OK)


@api_view(['GET'])
def run_detail(request, run_id):
    """
    Get one recorded run
    GET /api/experiments/runs/{id}/
    """
    run = get_object_or_404(ExperimentRun, id=run_id)
    serializer = ExperimentRunSerializer(run)
    return Response(serializer.data, status=status.HTTP_200_OK)
