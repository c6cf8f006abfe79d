"""
Amplification Lab - computational checks for the amplified sup-norm method
Command-line entry point.
"""

import logging
import sys
from logging.handlers import RotatingFileHandler

import click

from commands import COMMANDS
from commands.context import LabContext
from config.settings import Config, active_config
from utils.validators import InvariantViolation, LabError, ValidationError

logger = logging.getLogger(__name__)

LOG_FORMAT = '%(asctime)s %(levelname)s: %(message)s [in %(pathname)s:%(lineno)d]'


def configure_logging(level: str = Config.LOG_LEVEL, log_file: str = Config.LOG_FILE) -> None:
    """Send log records to stderr and, when configured, to a rotating file. Safe to call twice."""
    root = logging.getLogger()
    for handler in list(root.handlers):
        if getattr(handler, '_amplab', False):
            root.removeHandler(handler)
            handler.close()

    stream_handler = logging.StreamHandler(sys.stderr)
    stream_handler.setFormatter(logging.Formatter('%(levelname)s %(name)s: %(message)s'))
    stream_handler.setLevel(level.upper())
    stream_handler._amplab = True
    root.addHandler(stream_handler)

    if log_file:
        Config.init_app()
        file_handler = RotatingFileHandler(
            log_file,
            maxBytes=10240000,  # 10MB
            backupCount=10
        )
        file_handler.setFormatter(logging.Formatter(LOG_FORMAT))
        file_handler.setLevel(logging.INFO)
        file_handler._amplab = True
        root.addHandler(file_handler)

    root.setLevel(min(stream_handler.level, logging.INFO) if log_file else stream_handler.level)


class LabGroup(click.Group):
    """Maps lab exceptions onto the 0/1/2 exit-code contract."""

    def invoke(self, ctx):
        try:
            return super().invoke(ctx)
        except ValidationError as exc:
            logger.error(f"❌ {exc}")
            click.echo(f"Error: {exc}", err=True)
            ctx.exit(2)
        except InvariantViolation as exc:
            logger.error(f"❌ Invariant violated: {exc}")
            click.echo(f"Invariant violated: {exc}", err=True)
            ctx.exit(1)
        except LabError as exc:
            logger.error(f"❌ {exc}")
            click.echo(f"Error: {exc}", err=True)
            ctx.exit(1)


@click.group(cls=LabGroup)
@click.option('--config', 'config_path', type=click.Path(dir_okay=False), envvar='AMPLAB_CONFIG',
              default=None, help='Lab config JSON (default config/default_lab.json)')
@click.option('--seed', type=int, default=Config.DEFAULT_SEED, show_default=True)
@click.option('--threads', type=click.IntRange(min=1), default=Config.DEFAULT_THREADS,
              show_default=True, help='Parallelism cap for enumeration and sweeps')
@click.option('--out', type=click.Path(dir_okay=False), default=None,
              help='Write the primary JSON/CSV output here instead of stdout')
@click.option('--timing', is_flag=True, help='Include wall time in JSON reports')
@click.option('--log-level', 'log_level', default=None,
              type=click.Choice(['DEBUG', 'INFO', 'WARNING', 'ERROR'], case_sensitive=False))
@click.pass_context
def cli(ctx, config_path, seed, threads, out, timing, log_level):
    """Amplification lab: counting, Hecke, amplifier and window checks."""
    configure_logging(log_level or active_config().LOG_LEVEL)
    ctx.obj = LabContext(config_path, seed, threads, out, timing)
    logger.debug(f"Lab context: config={ctx.obj.config_path} seed={seed} threads={threads}")


for command in COMMANDS:
    cli.add_command(command)


def main():
    cli(prog_name='amplab')


if __name__ == '__main__':
    main()
