# Generated by Django 4.1.3 on 2026-10-16 10:12

from django.db import migrations, models
import django.db.models.deletion


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='Execucao',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('cenario', models.CharField(max_length=100, verbose_name='Cenário')),
                ('posicao', models.CharField(blank=True, max_length=50, null=True, verbose_name='Posição')),
                ('seed', models.BigIntegerField(verbose_name='Semente')),
                ('pacotes', models.PositiveIntegerField(verbose_name='Pacotes enviados')),
                ('entregues', models.PositiveIntegerField(verbose_name='Pacotes entregues')),
                ('pdr', models.DecimalField(decimal_places=2, max_digits=6, verbose_name='PDR (%)')),
                ('latencia_media_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=12, null=True, verbose_name='Latência média (ms)')),
                ('desvio_padrao_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=12, null=True, verbose_name='Desvio padrão (ms)')),
                ('intervalo_s', models.DecimalField(decimal_places=3, max_digits=8, verbose_name='Intervalo entre pacotes (s)')),
                ('keep_alive_s', models.DecimalField(decimal_places=3, max_digits=8, verbose_name='Keep-alive (s)')),
                ('tamanho_mensagem', models.PositiveIntegerField(verbose_name='Tamanho da mensagem (bytes)')),
                ('strict_floodsub', models.BooleanField(default=False, verbose_name='FloodSub estrito')),
                ('criado_em', models.DateTimeField(auto_now_add=True, verbose_name='Criado em')),
            ],
            options={
                'verbose_name': 'execução',
                'verbose_name_plural': 'execuções',
                'ordering': ('-criado_em',),
            },
        ),
        migrations.CreateModel(
            name='RegistroPacote',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('indice', models.PositiveIntegerField(verbose_name='Índice')),
                ('enviado_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=14, null=True, verbose_name='Enviado em (ms)')),
                ('recebido_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=14, null=True, verbose_name='Recebido em (ms)')),
                ('latencia_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=12, null=True, verbose_name='Latência (ms)')),
                ('status', models.CharField(choices=[('delivered', 'Entregue'), ('lost', 'Perdido')], default='lost', max_length=20, verbose_name='Status')),
                ('mesh_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=12, null=True, verbose_name='Mesh (ms)')),
                ('bridge_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=12, null=True, verbose_name='Bridge (ms)')),
                ('link_ms', models.DecimalField(blank=True, decimal_places=3, max_digits=12, null=True, verbose_name='Enlace (ms)')),
                ('execucao', models.ForeignKey(on_delete=django.db.models.deletion.CASCADE, related_name='registros', to='experimento.execucao', verbose_name='Execução')),
            ],
            options={
                'verbose_name': 'registro de pacote',
                'verbose_name_plural': 'registros de pacotes',
                'ordering': ('execucao', 'indice'),
                'unique_together': {('execucao', 'indice')},
            },
        ),
    ]
