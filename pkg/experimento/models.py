from django.db import models

from experimento import constants


class Execucao(models.Model):
    "Classe que representa uma execução do experimento de publicação"

    cenario = models.CharField("Cenário", max_length=100, null=False, blank=False)
    posicao = models.CharField("Posição", max_length=50, null=True, blank=True)
    seed = models.BigIntegerField("Semente")
    pacotes = models.PositiveIntegerField("Pacotes enviados")
    entregues = models.PositiveIntegerField("Pacotes entregues")
    pdr = models.DecimalField("PDR (%)", max_digits=6, decimal_places=2)
    latencia_media_ms = models.DecimalField(
        "Latência média (ms)", max_digits=12, decimal_places=3, null=True, blank=True
    )
    desvio_padrao_ms = models.DecimalField(
        "Desvio padrão (ms)", max_digits=12, decimal_places=3, null=True, blank=True
    )
    intervalo_s = models.DecimalField("Intervalo entre pacotes (s)", max_digits=8, decimal_places=3)
    keep_alive_s = models.DecimalField("Keep-alive (s)", max_digits=8, decimal_places=3)
    tamanho_mensagem = models.PositiveIntegerField("Tamanho da mensagem (bytes)")
    strict_floodsub = models.BooleanField("FloodSub estrito", default=False)
    criado_em = models.DateTimeField("Criado em", auto_now_add=True)

    def __str__(self):
        posicao = f"/{self.posicao}" if self.posicao else ""
        return f"{self.cenario}{posicao} seed {self.seed}"

    class Meta:
        verbose_name = "execução"
        verbose_name_plural = "execuções"
        ordering = ("-criado_em",)


class RegistroPacote(models.Model):
    "Resultado de um pacote publicado numa execução"

    execucao = models.ForeignKey(
        Execucao,
        verbose_name="Execução",
        on_delete=models.CASCADE,
        related_name="registros",
    )
    indice = models.PositiveIntegerField("Índice")
    enviado_ms = models.DecimalField("Enviado em (ms)", max_digits=14, decimal_places=3, null=True, blank=True)
    recebido_ms = models.DecimalField("Recebido em (ms)", max_digits=14, decimal_places=3, null=True, blank=True)
    latencia_ms = models.DecimalField("Latência (ms)", max_digits=12, decimal_places=3, null=True, blank=True)
    status = models.CharField(
        "Status",
        max_length=20,
        choices=constants.STATUS_PACOTE,
        default=constants.PERDIDO,
    )
    mesh_ms = models.DecimalField("Mesh (ms)", max_digits=12, decimal_places=3, null=True, blank=True)
    bridge_ms = models.DecimalField("Bridge (ms)", max_digits=12, decimal_places=3, null=True, blank=True)
    link_ms = models.DecimalField("Enlace (ms)", max_digits=12, decimal_places=3, null=True, blank=True)

    def __str__(self) -> str:
        return f"Pacote #{self.indice}"

    class Meta:
        verbose_name = "registro de pacote"
        verbose_name_plural = "registros de pacotes"
        ordering = ("execucao", "indice")
        unique_together = ("execucao", "indice")
