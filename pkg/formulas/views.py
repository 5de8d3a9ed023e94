from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response

from ensembles.exceptions import QNDError
from .serializers import PhaseErrorRequestSerializer, OptimalXiRequestSerializer
from .services.phase_error import delta_phi
from .services.optimizer import optimal_xi


@api_view(['POST'])
def phase_error(request):
    """
    Closed-form phase error of one protocol
    POST /api/formulas/phase-error/

    Body:
    {
        "xi": 1.0,
        "dg2": 0.0,
        "n_atoms": 100,
        "protocol": "matched",
        "n_photons": 4096   (optional, enables the photon-number regime margins)
    }
    """
    serializer = PhaseErrorRequestSerializer(data=request.data)
    if not serializer.is_valid():
        return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)

    data = serializer.validated_data
    try:
        result = delta_phi(
            data['protocol'],
            data['xi'],
            data['dg2'],
            data['n_atoms'],
            n_photons=data.get('n_photons'),
        )
    except QNDError as e:
        return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)

    return Response(result.to_dict(), status=status.HTTP_200_OK)


@api_view(['POST'])
def optimal_interaction(request):
    """
    Interaction strength minimizing the closed-form phase error
    POST /api/formulas/optimal-xi/

    Body:
    {
        "dg2": 1.0,
        "n_atoms": 100,
        "protocol": "matched",
        "xi_max": 100.0   (optional)
    }
    """
    serializer = OptimalXiRequestSerializer(data=request.data)
    if not serializer.is_valid():
        return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)

    data = serializer.validated_data
    try:
        xi_star, delta_phi_min = optimal_xi(
            data['dg2'],
            data['n_atoms'],
            data['protocol'],
            xi_max=data.get('xi_max'),
        )
    except QNDError as e:
        return Response({'error': str(e)}, status=status.HTTP_400_BAD_REQUEST)

    return Response({
        'protocol': data['protocol'],
        'dg2': data['dg2'],
        'n_atoms': data['n_atoms'],
        'xi_star': xi_star,
        'delta_phi_min': delta_phi_min,
    }, status=status.HTTP_200_OK)
