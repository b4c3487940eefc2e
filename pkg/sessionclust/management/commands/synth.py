"""
Management command to generate labelled synthetic data
"""
from pathlib import Path

from django.core.management.base import BaseCommand, CommandError

from sessionclust.dataset import save_dataset, save_labels
from sessionclust.errors import SessionClustError
from sessionclust.synthetic import SyntheticLogSpec, SyntheticSpec, generate_access_log, generate_synthetic


class Command(BaseCommand):
    help = 'Generate Gaussian blobs with ground-truth labels, or a synthetic access log'

    def add_arguments(self, parser):
        parser.add_argument('--k', type=int, default=3, help='Number of blobs')
        parser.add_argument('--per-cluster', type=int, default=100)
        parser.add_argument('--dim', type=int, default=2)
        parser.add_argument('--spread', type=float, default=10.0, help='Minimum distance between blob centres')
        parser.add_argument('--scale', type=float, default=1.0, help='Standard deviation inside a blob')
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--out-dataset', help='Dataset CSV to write')
        parser.add_argument('--out-labels', help='Labels CSV to write')
        parser.add_argument('--out-log', help='Write a synthetic Combined-format access log instead')
        parser.add_argument('--users', type=int, default=10, help='Users in the synthetic log')

    def handle(self, *args, **options):
        if options['out_log']:
            log = generate_access_log(SyntheticLogSpec(users=options['users'], seed=options['seed']))
            Path(options['out_log']).write_text('\n'.join(log.lines) + '\n')
            self.stdout.write(self.style.SUCCESS(
                f"Wrote {len(log.lines)} log lines ({log.session_count} sessions, "
                f"{log.noise_lines} noise lines) to {options['out_log']}"
            ))
            return

        if not options['out_dataset'] or not options['out_labels']:
            raise CommandError('--out-dataset and --out-labels are required')
        try:
            data, labels = generate_synthetic(SyntheticSpec(
                cluster_count=options['k'],
                points_per_cluster=options['per_cluster'],
                dimension=options['dim'],
                spread=options['spread'],
                scale=options['scale'],
                seed=options['seed'],
            ))
        except SessionClustError as e:
            raise CommandError(str(e)) from e
        save_dataset(data, options['out_dataset'])
        save_labels(labels, options['out_labels'])
        self.stdout.write(self.style.SUCCESS(
            f"Wrote {data.m} points in {data.n} dimensions ({labels.class_count} classes)"
        ))
