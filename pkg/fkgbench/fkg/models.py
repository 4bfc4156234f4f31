from django.db import models


class ArchivedReport(models.Model):
    """A command report kept for later inspection (``--archive``)."""

    command = models.CharField(max_length=255)
    outcome = models.CharField(
        max_length=20,
        choices=[('pass', 'Pass'), ('violation', 'Violation'), ('inconclusive', 'Inconclusive'), ('error', 'Error')]
    )
    payload = models.JSONField(default=dict, help_text="Report as emitted with --format json")
    created_at = models.DateTimeField(auto_now_add=True)

    def __str__(self):
        return f"{self.command} - {self.outcome}"

    class Meta:
        ordering = ['-created_at']
