from django.contrib import admin

from .models import SweepResult, SweepRun


class SweepResultInline(admin.TabularInline):
    model = SweepResult
    extra = 0
    can_delete = False
    fields = ('position', 'parameter', 'eta', 'clusters_found', 'dunn', 'db', 'silhouette', 'sse', 'exec_time_ms')
    readonly_fields = fields


@admin.register(SweepRun)
class SweepRunAdmin(admin.ModelAdmin):
    list_display = ('id', 'technique', 'dataset_path', 'seed', 'started_at', 'finished_at')
    list_filter = ('technique', 'started_at')
    search_fields = ('dataset_path', 'technique')
    readonly_fields = ('created_at', 'updated_at')
    ordering = ('-started_at',)
    inlines = [SweepResultInline]


@admin.register(SweepResult)
class SweepResultAdmin(admin.ModelAdmin):
    list_display = ('run', 'technique', 'parameter', 'eta', 'clusters_found', 'silhouette', 'sse', 'exec_time_ms')
    list_filter = ('technique', 'clusters_found')
    ordering = ('run', 'position')
