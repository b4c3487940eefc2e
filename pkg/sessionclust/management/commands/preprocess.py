"""
Management command to turn raw access logs into session vectors
"""
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from sessionclust.errors import SessionClustError
from sessionclust.logs import LogFormat, Weighting, preprocess, write_dataset_csv, write_sessions_csv


class Command(BaseCommand):
    help = 'Clean, sessionize and vectorize web access logs'

    def add_arguments(self, parser):
        defaults = settings.SESSIONCLUST
        parser.add_argument('logs', nargs='*', help='Access log files, read in the order given')
        parser.add_argument('--in', dest='in_logs', nargs='+', default=[], metavar='LOG',
                            help='More access log files, read after the positional ones')
        parser.add_argument('--format', choices=[f.value for f in LogFormat], default=LogFormat.COMBINED.value)
        parser.add_argument('--timeout-min', type=float, default=defaults['SESSION_TIMEOUT_MIN'],
                            help='Inactivity gap that ends a session, in minutes')
        parser.add_argument('--last-dwell-s', type=float, default=defaults['LAST_DWELL_S'],
                            help='Dwell seconds given to the last page of a session')
        parser.add_argument('--keep-query', action='store_true', default=not defaults['STRIP_QUERY'],
                            help='Keep query strings when comparing URLs')
        parser.add_argument('--weighting', choices=[w.value for w in Weighting], default=Weighting.DWELL.value)
        parser.add_argument('--out-dataset', required=True, help='Session vector CSV to write')
        parser.add_argument('--out-sessions', help='Optional per-page-view sessions CSV')

    def handle(self, *args, **options):
        logs = options['logs'] + options['in_logs']
        if not logs:
            raise CommandError('No access logs given (positional paths or --in)')
        try:
            result = preprocess(
                logs,
                format=options['format'],
                timeout_s=options['timeout_min'] * 60.0,
                last_dwell_s=options['last_dwell_s'],
                strip_query=not options['keep_query'],
                weighting=options['weighting'],
            )
        except (OSError, SessionClustError) as e:
            raise CommandError(str(e)) from e

        write_dataset_csv(result.dataset, options['out_dataset'])
        if options['out_sessions']:
            write_sessions_csv(result.sessions, options['out_sessions'])

        counts = result.counts
        self.stdout.write(f"Raw entries:      {counts.raw_entries}")
        if counts.skipped_lines:
            self.stdout.write(self.style.WARNING(f"Skipped lines:    {counts.skipped_lines}"))
        self.stdout.write(f"After cleaning:   {counts.cleaned_entries}")
        self.stdout.write(f"Distinct URLs:    {counts.urls}")
        self.stdout.write(f"Users:            {counts.users}")
        self.stdout.write(f"Sessions:         {counts.sessions}")
        self.stdout.write(self.style.SUCCESS(f"Wrote {counts.sessions}x{counts.urls} dataset to {options['out_dataset']}"))
