# Generated by Django 4.2 on 2026-10-17 10:12

from django.db import migrations, models
import django.db.models.deletion
import django.utils.timezone


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='SweepRun',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('technique', models.CharField(max_length=32)),
                ('algorithm', models.CharField(max_length=16)),
                ('dataset_path', models.CharField(blank=True, max_length=512)),
                ('labels_path', models.CharField(blank=True, max_length=512)),
                ('seed', models.IntegerField(default=0)),
                ('config_text', models.TextField(blank=True)),
                ('started_at', models.DateTimeField(db_index=True, default=django.utils.timezone.now)),
                ('finished_at', models.DateTimeField(blank=True, null=True)),
                ('created_at', models.DateTimeField(auto_now_add=True)),
                ('updated_at', models.DateTimeField(auto_now=True)),
            ],
        ),
        migrations.CreateModel(
            name='SweepResult',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('position', models.PositiveIntegerField()),
                ('technique', models.CharField(max_length=32)),
                ('parameter', models.FloatField()),
                ('eta', models.IntegerField(blank=True, null=True)),
                ('clusters_found', models.IntegerField()),
                ('dunn', models.FloatField(blank=True, null=True)),
                ('db', models.FloatField(blank=True, null=True)),
                ('jaccard', models.FloatField(blank=True, null=True)),
                ('c_index', models.FloatField(blank=True, null=True)),
                ('rand', models.FloatField(blank=True, null=True)),
                ('fm', models.FloatField(blank=True, null=True)),
                ('silhouette', models.FloatField(blank=True, null=True)),
                ('sse', models.FloatField(blank=True, null=True)),
                ('exec_time_ms', models.FloatField()),
                ('run', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='results', to='sessionclust.sweeprun')),
            ],
            options={
                'ordering': ['run', 'position'],
            },
        ),
        migrations.AddIndex(
            model_name='sweepresult',
            index=models.Index(fields=['run', 'technique', 'clusters_found'], name='sweepresult_run_tech_k_idx'),
        ),
    ]
