import functools
import json
import logging
import pathlib as pl
import traceback

logger = logging.getLogger(__name__)


def safeguard(stage: str):
    """
    A decorator for sweep stages: on any exception, dump the replay context
    of the failing trial to ``<output_dir>/crash_dumps/`` and re-raise.

    The wrapped function takes the trial object first; the trial must expose
    ``output_dir`` and ``replay()`` (seed, n, N and the function specs).
    """
    def wrap(fn):
        @functools.wraps(fn)
        def inner(trial, *args, **kwargs):
            try:
                return fn(trial, *args, **kwargs)
            except Exception as exc:  # noqa: BLE001 (re-raised below)
                try:
                    replay = json.loads(json.dumps(trial.replay(), default=str))
                except Exception:  # noqa: BLE001
                    replay = {"error": "trial has no serializable replay context"}

                dump_data = {
                    "stage_failed": stage,
                    "error_type": type(exc).__name__,
                    "error_message": str(exc),
                    "traceback": traceback.format_exc(),
                    "replay": replay,
                }

                crash_dump_dir = pl.Path(getattr(trial, "output_dir", ".")) / "crash_dumps"
                dump_file_path = crash_dump_dir / f"crash_{stage}_{replay.get('seed', 'unknown')}.json"
                try:
                    crash_dump_dir.mkdir(parents=True, exist_ok=True)
                    dump_file_path.write_text(json.dumps(dump_data, indent=2, sort_keys=True))
                    logger.error("stage %r failed (%s); replay context dumped to %s",
                                 stage, type(exc).__name__, dump_file_path)
                except OSError as dump_exc:
                    logger.error("stage %r failed; could not write dump file: %s", stage, dump_exc)
                raise
        return inner
    return wrap
