"""
Management command to hold the fast implementations to their brute-force oracles
"""
from pathlib import Path

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from sessionclust.oracles import oracle_trials, worst_deviations


class Command(BaseCommand):
    help = 'Run randomized oracle checks and report the worst deviation per check'

    def add_arguments(self, parser):
        defaults = settings.SESSIONCLUST
        parser.add_argument('--max-m', type=int, default=defaults['ORACLE_MAX_M'])
        parser.add_argument('--trials', type=int, default=200)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--tolerance', type=float, default=defaults['ORACLE_TOLERANCE'])
        parser.add_argument('--failures-dir', help='Directory for replayable JSON of failing instances')

    def handle(self, *args, **options):
        self.stdout.write(f"Running {options['trials']} oracle trials (m <= {options['max_m']})...")
        reports = oracle_trials(options['max_m'], options['trials'], options['seed'], options['tolerance'])

        for name, deviation in sorted(worst_deviations(reports).items()):
            passed = all(check.passed for report in reports for check in report.checks if check.name == name)
            line = f"{name:<20} max deviation {deviation:.3g}"
            self.stdout.write(self.style.SUCCESS(f"PASS {line}") if passed else self.style.ERROR(f"FAIL {line}"))

        failures = [instance for report in reports for instance in report.failures]
        if failures and options['failures_dir']:
            target = Path(options['failures_dir'])
            target.mkdir(parents=True, exist_ok=True)
            for number, instance in enumerate(failures):
                (target / f'failure_{number:04d}.json').write_text(instance)
        if failures:
            raise CommandError(f"{len(failures)} oracle mismatches")
        self.stdout.write(self.style.SUCCESS("All oracle checks passed"))
