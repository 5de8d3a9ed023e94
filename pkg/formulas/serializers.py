from rest_framework import serializers

from ensembles.domain import Protocol

PROTOCOL_CHOICES = [p.value for p in Protocol]


class PhaseErrorRequestSerializer(serializers.Serializer):
    """Input for the closed-form phase error of one protocol"""
    xi = serializers.FloatField(min_value=0.0)
    dg2 = serializers.FloatField(min_value=0.0, default=0.0)
    n_atoms = serializers.IntegerField(min_value=1)
    protocol = serializers.ChoiceField(choices=PROTOCOL_CHOICES, default=Protocol.MATCHED.value)
    n_photons = serializers.IntegerField(min_value=1, required=False, allow_null=True)

    def validate_xi(self, value):
        if value == 0:
            raise serializers.ValidationError("xi must be positive; the phase error diverges at xi = 0.")
        return value


class OptimalXiRequestSerializer(serializers.Serializer):
    """Input for the optimal interaction strength search"""
    dg2 = serializers.FloatField(min_value=0.0, default=0.0)
    n_atoms = serializers.IntegerField(min_value=1)
    protocol = serializers.ChoiceField(choices=PROTOCOL_CHOICES, default=Protocol.MATCHED.value)
    xi_max = serializers.FloatField(required=False)

    def validate_xi_max(self, value):
        if value <= 0:
            raise serializers.ValidationError("xi_max must be positive.")
        return value
