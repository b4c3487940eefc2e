"""
Background sweeps using Huey: run a sweep from its config file and store the rows
"""
import logging
from pathlib import Path

from django.conf import settings
from django.db import transaction
from django.utils import timezone
from huey.contrib.djhuey import task

from .harness import emit_report, load_sweep_config, run_sweep
from .models import SweepResult, SweepRun

logger = logging.getLogger(__name__)


def run_and_store_sweep(config_path):
    """
    Run the sweep described by ``config_path`` and persist it:
    - one SweepRun holding the technique, dataset, seed and the config text
    - one SweepResult per grid cell, in grid order
    - the report and series files too, when the config names an output

    Can be called directly or through the Huey task below.
    """
    config_path = Path(config_path)
    config = load_sweep_config(config_path, settings.SESSIONCLUST)
    started_at = timezone.now()
    rows = run_sweep(config)
    with transaction.atomic():
        run = SweepRun.objects.create(
            technique=config.technique,
            algorithm=config.algorithm.value,
            dataset_path=str(config.dataset or ''),
            labels_path=str(config.labels or ''),
            seed=config.seed,
            config_text=config_path.read_text(),
            started_at=started_at,
            finished_at=timezone.now(),
        )
        SweepResult.objects.bulk_create(
            [SweepResult.from_row(run, position, row) for position, row in enumerate(rows)]
        )

    written = []
    if config.output is not None:
        written = emit_report(rows, config.output, config.format, config.series_dir)
    logger.info('Stored sweep run %s: %s rows of %s', run.pk, len(rows), run.technique)
    return {
        'run_id': run.pk,
        'technique': run.technique,
        'rows': len(rows),
        'files': [str(path) for path in written],
    }


@task()
def run_and_store_sweep_async(config_path):
    """
    Async wrapper for run_and_store_sweep
    """
    return run_and_store_sweep(str(config_path))
