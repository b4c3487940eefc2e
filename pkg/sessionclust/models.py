from dataclasses import asdict

from django.db import models
from django.utils import timezone

from .harness import ResultRow


class SweepRun(models.Model):
    """One stored parameter sweep: which technique, on what data, with what config."""

    technique = models.CharField(max_length=32)
    algorithm = models.CharField(max_length=16)
    dataset_path = models.CharField(max_length=512, blank=True)
    labels_path = models.CharField(max_length=512, blank=True)
    seed = models.IntegerField(default=0)
    config_text = models.TextField(blank=True)
    started_at = models.DateTimeField(default=timezone.now, db_index=True)
    finished_at = models.DateTimeField(null=True, blank=True)
    created_at = models.DateTimeField(auto_now_add=True)
    updated_at = models.DateTimeField(auto_now=True)

    def __str__(self):
        return f"{self.technique} sweep #{self.pk} (seed {self.seed})"


class SweepResult(models.Model):
    run = models.ForeignKey(SweepRun, on_delete=models.CASCADE, related_name='results')
    position = models.PositiveIntegerField()
    technique = models.CharField(max_length=32)
    parameter = models.FloatField()
    eta = models.IntegerField(null=True, blank=True)
    clusters_found = models.IntegerField()
    dunn = models.FloatField(null=True, blank=True)
    db = models.FloatField(null=True, blank=True)
    jaccard = models.FloatField(null=True, blank=True)
    c_index = models.FloatField(null=True, blank=True)
    rand = models.FloatField(null=True, blank=True)
    fm = models.FloatField(null=True, blank=True)
    silhouette = models.FloatField(null=True, blank=True)
    sse = models.FloatField(null=True, blank=True)
    exec_time_ms = models.FloatField()

    class Meta:
        ordering = ['run', 'position']
        indexes = [
            models.Index(fields=['run', 'technique', 'clusters_found'], name='sweepresult_run_tech_k_idx'),
        ]

    def __str__(self):
        return f"{self.technique} k={self.clusters_found} (parameter {self.parameter})"

    @classmethod
    def from_row(cls, run: SweepRun, position: int, row: ResultRow) -> 'SweepResult':
        return cls(run=run, position=position, **asdict(row))

    def to_row(self) -> ResultRow:
        return ResultRow(
            technique=self.technique,
            parameter=self.parameter,
            eta=self.eta,
            clusters_found=self.clusters_found,
            dunn=self.dunn,
            db=self.db,
            jaccard=self.jaccard,
            c_index=self.c_index,
            rand=self.rand,
            fm=self.fm,
            silhouette=self.silhouette,
            sse=self.sse,
            exec_time_ms=self.exec_time_ms,
        )
