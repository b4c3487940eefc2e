"""
Management command to run one clustering technique over a dataset CSV
"""
from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from sessionclust.algorithms import Algorithm, Linkage, run_algorithm, technique_name
from sessionclust.dataset import load_dataset, save_clustering, save_representatives
from sessionclust.errors import SessionClustError


class Command(BaseCommand):
    help = 'Cluster a dataset with k-Means, k-Medoids, Leader, hierarchical or DBSCAN'

    def add_arguments(self, parser):
        defaults = settings.SESSIONCLUST
        parser.add_argument('--algo', '--algorithm', dest='algorithm', required=True, choices=[a.value for a in Algorithm])
        parser.add_argument('--in', '--data', dest='data', required=True, help='Dataset CSV (header = dimension names)')
        parser.add_argument('--k', type=int, help='Cluster count (kmeans, kmedoids, hier)')
        parser.add_argument('--alpha', type=float, help='Leader threshold on the squared distance')
        parser.add_argument('--eps', type=float, help='DBSCAN radius on the squared distance')
        parser.add_argument('--eta', type=int, help='DBSCAN minimum neighbourhood size')
        parser.add_argument('--linkage', choices=[link.value for link in Linkage], default=Linkage.SINGLE.value)
        parser.add_argument('--seed', type=int, default=0)
        parser.add_argument('--restarts', type=int, default=1)
        parser.add_argument('--tol', type=float, default=defaults['KMEANS_TOL'])
        parser.add_argument('--max-iter', type=int, default=defaults['MAX_ITER'])
        parser.add_argument('--out', required=True, help='Assignment CSV (point_index,cluster_id)')
        parser.add_argument('--out-representatives', help='Centroids, medoids or leaders CSV')

    def handle(self, *args, **options):
        try:
            data = load_dataset(options['data'])
            clustering = run_algorithm(
                options['algorithm'],
                data,
                k=options['k'],
                alpha=options['alpha'],
                eps=options['eps'],
                eta=options['eta'],
                linkage=options['linkage'],
                seed=options['seed'],
                tol=options['tol'],
                max_iter=options['max_iter'],
                restarts=options['restarts'],
            )
            save_clustering(clustering, options['out'])
            if options['out_representatives']:
                save_representatives(clustering, data.columns, options['out_representatives'])
        except (OSError, SessionClustError) as e:
            raise CommandError(str(e)) from e

        name = technique_name(options['algorithm'], options['linkage'])
        summary = f"{name}: {clustering.k} clusters over {clustering.m} points"
        if clustering.noise_count:
            summary += f", {clustering.noise_count} noise"
        if clustering.objective is not None:
            summary += f", objective {clustering.objective:.6g} after {clustering.iterations} iterations"
        self.stdout.write(self.style.SUCCESS(summary))
