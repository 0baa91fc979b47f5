import datetime as dt
import json
import logging
try:
    from typing import override
except ImportError:  # Python < 3.12
    def override(method):
        return method

# LogRecord attributes set through extra= by the lctdv library
CONTEXT_KEYS = ('surface', 'lemma', 'location', 'step')


class custom_json_logger(logging.Formatter):
    '''One JSON object per record: the mapped record attributes plus any domain context.'''

    def __init__(
        self,
        *,
        format_keys: dict[str, str] | None = None,
        context_keys: list[str] | None = None,
    ):
        super().__init__()
        self.format_keys = format_keys if format_keys is not None else {}
        self.context_keys = tuple(context_keys) if context_keys is not None else CONTEXT_KEYS

    @override
    def format(self, record: logging.LogRecord) -> str:
        return json.dumps(self._prepare_log_dict(record), default=str, ensure_ascii=False)

    def _computed_fields(self, record: logging.LogRecord) -> dict:
        fields = {
            "message": record.getMessage(),
            "timestamp": dt.datetime.fromtimestamp(record.created, tz=dt.timezone.utc).isoformat(),
        }
        if record.exc_info is not None:
            fields["exc_info"] = self.formatException(record.exc_info)
        if record.stack_info is not None:
            fields["stack_info"] = self.formatStack(record.stack_info)
        return fields

    def _prepare_log_dict(self, record: logging.LogRecord) -> dict:
        computed = self._computed_fields(record)
        entry = {
            key: value if (value := computed.pop(attribute, None)) is not None else getattr(record, attribute, None)
            for key, attribute in self.format_keys.items()
        }
        entry.update(computed)
        context = {key: getattr(record, key) for key in self.context_keys if hasattr(record, key)}
        if context:
            entry["context"] = context
        return entry
