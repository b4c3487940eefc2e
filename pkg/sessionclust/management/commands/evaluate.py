"""
Management command to score a stored clustering with every validity index
"""
import json

from django.core.management.base import BaseCommand, CommandError

from sessionclust.dataset import load_clustering, load_dataset, load_labels
from sessionclust.errors import SessionClustError
from sessionclust.validity import INDEX_NAMES, full_report, save_index_report


class Command(BaseCommand):
    help = 'Compute internal (and, with --labels, external) validity indices'

    def add_arguments(self, parser):
        parser.add_argument('--dataset', '--data', dest='data', required=True, help='Dataset CSV')
        parser.add_argument('--clustering', required=True, help='Assignment CSV (point_index,cluster_id)')
        parser.add_argument('--labels', help='Reference classes CSV (point_index,class_id)')
        parser.add_argument('--json', action='store_true', help='Print the report as JSON')
        parser.add_argument('--out', help='Write the report as CSV (index,value,reason)')

    def handle(self, *args, **options):
        try:
            data = load_dataset(options['data'])
            clustering = load_clustering(options['clustering'])
            labels = load_labels(options['labels']) if options['labels'] else None
            report = full_report(data, clustering, labels)
            if options['out']:
                save_index_report(report, options['out'])
        except (OSError, SessionClustError) as e:
            raise CommandError(str(e)) from e

        if options['json']:
            self.stdout.write(json.dumps(report.as_dict(), sort_keys=True))
            return
        for name in INDEX_NAMES:
            value = getattr(report, name)
            if value is not None:
                self.stdout.write(f"{name:<16} {value!r}")
            elif name in report.reasons:
                self.stdout.write(self.style.WARNING(f"{name:<16} undefined ({report.reasons[name]})"))
