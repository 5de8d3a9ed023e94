from django.db import models


class ExperimentRun(models.Model):
    """A recorded command-line run: its configuration and a digest of its output"""
    COMMAND_CHOICES = [
        ('qnd_formulas', 'Closed-form phase errors'),
        ('qnd_simulate', 'Exact simulation vs oracle vs formulas'),
        ('qnd_squeezing', 'Squeezing parameters per stage'),
        ('qnd_disorder', 'Disorder-averaged sweep'),
    ]
    FORMAT_CHOICES = [
        ('csv', 'CSV'),
        ('json', 'JSON'),
    ]

    command = models.CharField(max_length=50, choices=COMMAND_CHOICES)
    config = models.JSONField(default=dict)  # RunConfig.to_dict()
    output_format = models.CharField(max_length=10, choices=FORMAT_CHOICES, default='csv')
    output_sha256 = models.CharField(max_length=64)
    row_count = models.PositiveIntegerField(default=0)

    created_at = models.DateTimeField(auto_now_add=True)

    class Meta:
        db_table = 'experiment_runs'
        ordering = ['-created_at', '-id']

    def __str__(self):
        return f"{self.command} ({self.output_sha256[:12]})"
