# Generated by Django 5.2.8 on 2026-10-18 10:12

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ExperimentRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(choices=[('qnd_formulas', 'Closed-form phase errors'), ('qnd_simulate', 'Exact simulation vs oracle vs formulas'), ('qnd_squeezing', 'Squeezing parameters per stage'), ('qnd_disorder', 'Disorder-averaged sweep')], max_length=50)),
                ('config', models.JSONField(default=dict)),
                ('output_format', models.CharField(choices=[('csv', 'CSV'), ('json', 'JSON')], default='csv', max_length=10)),
                ('output_sha256', models.CharField(max_length=64)),
                ('row_count', models.PositiveIntegerField(default=0)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'db_table': 'experiment_runs',
                'ordering': ['-created_at', '-id'],
            },
        ),
    ]
