# Generated by Django 4.1.5 on 2026-10-18 00:00

from django.db import migrations, models


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='ArchivedReport',
            fields=[
                ('id', models.BigAutoField(auto_created=True, primary_key=True, serialize=False, verbose_name='ID')),
                ('command', models.CharField(max_length=255)),
                ('outcome', models.CharField(choices=[('pass', 'Pass'), ('violation', 'Violation'), ('inconclusive', 'Inconclusive'), ('error', 'Error')], max_length=20)),
                ('payload', models.JSONField(default=dict, help_text='Report as emitted with --format json')),
                ('created_at', models.DateTimeField(auto_now_add=True)),
            ],
            options={
                'ordering': ['-created_at'],
            },
        ),
    ]
