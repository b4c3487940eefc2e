from typing import List

from django.conf import settings
from rest_framework import status
from rest_framework.decorators import api_view
from rest_framework.response import Response

from .algorithms import Algorithm, Linkage, run_algorithm, technique_name
from .dataset import Clustering, Dataset, ReferenceLabels
from .errors import SessionClustError
from .validity import full_report


def _is_number(value) -> bool:
    if isinstance(value, bool):
        return False
    try:
        float(value)
    except (TypeError, ValueError):
        return False
    return True


def _is_integer(value) -> bool:
    return _is_number(value) and float(value) == int(float(value))


def validate_points(points) -> List[str]:
    if not isinstance(points, list) or not points:
        return ['points must be a non-empty list of coordinate lists']
    if not all(isinstance(row, list) and row for row in points):
        return ['points must be a non-empty list of coordinate lists']
    if len({len(row) for row in points}) != 1:
        return ['all points must have the same dimension']
    if not all(_is_number(value) for row in points for value in row):
        return ['point coordinates must be numbers']
    return []


def validate_id_list(values, name: str, length: int) -> List[str]:
    if not isinstance(values, list) or not all(_is_integer(v) for v in values):
        return [f'{name} must be a list of integers']
    if len(values) != length:
        return [f'{name} must have one entry per point']
    return []


def validate_cluster_request(data) -> List[str]:
    """Validation messages for a /api/cluster/ body (empty when valid)."""
    errors = validate_points(data.get('points'))
    algorithm = data.get('algorithm')
    if algorithm not in {a.value for a in Algorithm}:
        errors.append('algorithm must be one of ' + ', '.join(a.value for a in Algorithm))
        return errors
    algorithm = Algorithm(algorithm)
    if algorithm in (Algorithm.KMEANS, Algorithm.KMEDOIDS, Algorithm.HIERARCHICAL):
        if not _is_integer(data.get('k')) or int(float(data.get('k'))) < 1:
            errors.append('k must be a positive integer')
    if algorithm is Algorithm.LEADER and not (_is_number(data.get('alpha')) and float(data['alpha']) > 0):
        errors.append('alpha must be a positive number')
    if algorithm is Algorithm.DBSCAN:
        if not (_is_number(data.get('eps')) and float(data['eps']) > 0):
            errors.append('eps must be a positive number')
        if not _is_integer(data.get('eta')) or int(float(data.get('eta'))) < 1:
            errors.append('eta must be a positive integer')
    if data.get('linkage', 'single') not in {link.value for link in Linkage}:
        errors.append('linkage must be single, complete or average')
    for name in ('seed', 'restarts'):
        if name in data and not _is_integer(data[name]):
            errors.append(f'{name} must be an integer')
    if not errors and data.get('labels') is not None:
        errors.extend(validate_id_list(data['labels'], 'labels', len(data['points'])))
    return errors


def _report_payload(report) -> dict:
    payload = report.values()
    payload['reasons'] = report.reasons
    return payload


@api_view(['POST'])
def cluster_endpoint(request):
    """
    POST /api/cluster/ runs one clustering technique over posted points.

    Accepts: {algorithm, points, k | alpha | eps+eta, linkage?, seed?, restarts?, labels?}
    Returns: {technique, k, assignment, noise_count, objective, iterations, report}
    """
    errors = validate_cluster_request(request.data)
    if errors:
        return Response({'errors': errors}, status=status.HTTP_400_BAD_REQUEST)

    data = request.data
    defaults = settings.SESSIONCLUST
    try:
        points = Dataset(data['points'])
        clustering = run_algorithm(
            data['algorithm'],
            points,
            k=int(float(data['k'])) if data.get('k') is not None else None,
            alpha=float(data['alpha']) if data.get('alpha') is not None else None,
            eps=float(data['eps']) if data.get('eps') is not None else None,
            eta=int(float(data['eta'])) if data.get('eta') is not None else None,
            linkage=data.get('linkage', 'single'),
            seed=int(float(data.get('seed', 0))),
            tol=defaults['KMEANS_TOL'],
            max_iter=defaults['MAX_ITER'],
            restarts=int(float(data.get('restarts', 1))),
        )
        labels = ReferenceLabels(data['labels']) if data.get('labels') is not None else None
        report = full_report(points, clustering, labels)
    except SessionClustError as e:
        return Response({'errors': [str(e)]}, status=status.HTTP_400_BAD_REQUEST)

    return Response({
        'technique': technique_name(data['algorithm'], data.get('linkage', 'single')),
        'k': clustering.k,
        'assignment': clustering.assignment.tolist(),
        'noise_count': clustering.noise_count,
        'objective': clustering.objective,
        'iterations': clustering.iterations,
        'representatives': (clustering.representatives.tolist()
                            if clustering.representatives is not None else None),
        'report': _report_payload(report),
    })


@api_view(['POST'])
def evaluate_endpoint(request):
    """
    POST /api/evaluate/ scores a posted clustering with every validity index.

    Accepts: {points, assignment (-1 = NOISE), labels?}
    Returns: {k, noise_count, report}
    """
    data = request.data
    errors = validate_points(data.get('points'))
    if not errors:
        errors.extend(validate_id_list(data.get('assignment'), 'assignment', len(data['points'])))
        if data.get('labels') is not None:
            errors.extend(validate_id_list(data['labels'], 'labels', len(data['points'])))
    if errors:
        return Response({'errors': errors}, status=status.HTTP_400_BAD_REQUEST)

    try:
        points = Dataset(data['points'])
        clustering = Clustering.from_labels(int(float(c)) for c in data['assignment'])
        labels = ReferenceLabels(data['labels']) if data.get('labels') is not None else None
        report = full_report(points, clustering, labels)
    except SessionClustError as e:
        return Response({'errors': [str(e)]}, status=status.HTTP_400_BAD_REQUEST)

    return Response({
        'k': clustering.k,
        'noise_count': clustering.noise_count,
        'report': _report_payload(report),
    })
