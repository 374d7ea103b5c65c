from django.contrib import admin
from django_admin_listfilter_dropdown.filters import DropdownFilter
from import_export import resources
from import_export.admin import ImportExportModelAdmin
from rangefilter.filters import DateRangeFilter

from experimento.models import Execucao, RegistroPacote


class RegistroPacoteInline(admin.TabularInline):
    model = RegistroPacote
    extra = 0
    can_delete = False
    readonly_fields = (
        "indice",
        "enviado_ms",
        "recebido_ms",
        "latencia_ms",
        "status",
        "mesh_ms",
        "bridge_ms",
        "link_ms",
    )


class ExecucaoResource(resources.ModelResource):
    class Meta:
        model = Execucao
        fields = (
            "id",
            "cenario",
            "posicao",
            "seed",
            "pacotes",
            "entregues",
            "pdr",
            "latencia_media_ms",
            "desvio_padrao_ms",
            "intervalo_s",
            "keep_alive_s",
            "tamanho_mensagem",
            "strict_floodsub",
            "criado_em",
        )
        export_order = fields


class RegistroPacoteResource(resources.ModelResource):
    class Meta:
        model = RegistroPacote
        fields = (
            "id",
            "execucao__cenario",
            "execucao__seed",
            "indice",
            "enviado_ms",
            "recebido_ms",
            "latencia_ms",
            "status",
            "mesh_ms",
            "bridge_ms",
            "link_ms",
        )
        export_order = fields


class ExecucaoAdmin(ImportExportModelAdmin):
    model = Execucao
    resource_class = ExecucaoResource
    inlines = [RegistroPacoteInline]

    list_display = (
        "cenario",
        "posicao",
        "seed",
        "pdr",
        "latencia_media_ms",
        "criado_em",
    )
    search_fields = ("cenario", "posicao")
    search_help_text = "Pesquise por cenário ou posição."
    list_filter = (
        ("cenario", DropdownFilter),
        ("posicao", DropdownFilter),
        "strict_floodsub",
        ("criado_em", DateRangeFilter),
    )
    readonly_fields = ("criado_em",)


class RegistroPacoteAdmin(ImportExportModelAdmin):
    model = RegistroPacote
    resource_class = RegistroPacoteResource

    list_display = ("execucao", "indice", "status", "latencia_ms")
    list_filter = (
        "status",
        ("execucao__cenario", DropdownFilter),
        ("execucao__criado_em", DateRangeFilter),
    )
    search_fields = ("execucao__cenario",)


admin.site.register(Execucao, ExecucaoAdmin)
admin.site.register(RegistroPacote, RegistroPacoteAdmin)
