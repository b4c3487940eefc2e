"""
Management command to run parameter sweeps from SWEEP_* config files
"""
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from sessionclust.errors import SessionClustError
from sessionclust.harness import REPORT_FORMATS, emit_report, load_sweep_config, recommend_k, run_sweep
from sessionclust.tasks import run_and_store_sweep, run_and_store_sweep_async


class Command(BaseCommand):
    help = 'Sweep clustering techniques over their parameter grids and report every index'

    def add_arguments(self, parser):
        parser.add_argument(
            '--config',
            action='append',
            required=True,
            help='KEY=VALUE sweep config file; repeat to sweep several techniques',
        )
        parser.add_argument('--out', help='Combined report of every sweep, one technique per series column')
        parser.add_argument('--format', choices=REPORT_FORMATS, default='csv', help='Format of the combined report')
        parser.add_argument('--series-dir', help='Series files of the combined report')
        parser.add_argument(
            '--save',
            action='store_true',
            help='Store each run and its rows in the database',
        )
        parser.add_argument(
            '--async',
            action='store_true',
            help='Run each sweep as an async task (requires Huey worker); implies --save',
        )

    def handle(self, *args, **options):
        configs = options['config']
        if options['async']:
            self.stdout.write("Scheduling async sweep tasks...")
            for path in configs:
                task = run_and_store_sweep_async(path)
                self.stdout.write(self.style.SUCCESS(f"Task scheduled for {path}: {task.id}"))
            return

        rows = []
        try:
            if options['save']:
                self.stdout.write("Running sweeps and storing results...")
                for path in configs:
                    result = run_and_store_sweep(path)
                    self.stdout.write(self.style.SUCCESS(
                        f"Sweep run {result['run_id']} stored: {result['rows']} rows of {result['technique']}"
                    ))
                return

            for path in configs:
                config = load_sweep_config(path, settings.SESSIONCLUST)
                swept = run_sweep(config)
                if config.output is not None:
                    written = emit_report(swept, config.output, config.format, config.series_dir)
                    self.stdout.write(f"Wrote {', '.join(str(p) for p in written)}")
                rows.extend(swept)

            if options['out']:
                written = emit_report(rows, options['out'], options['format'], options['series_dir'])
                self.stdout.write(f"Wrote combined report {', '.join(str(p) for p in written)}")
        except (OSError, SessionClustError) as e:
            raise CommandError(str(e)) from e

        for technique, picks in recommend_k(rows).items():
            chosen = ', '.join(f"{name}={k}" for name, k in picks.items() if k is not None)
            self.stdout.write(f"{technique} best k by index: {chosen or 'none defined'}")
        self.stdout.write(self.style.SUCCESS(f"Sweep completed: {len(rows)} cells"))
