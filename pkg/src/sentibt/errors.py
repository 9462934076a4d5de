"""Exception hierarchy shared by every module."""


class SentiBTError(Exception):
    """Base class for all errors raised by sentibt."""


class ParseError(SentiBTError):
    def __init__(self, message: str, line: int | None = None, source: str | None = None):
        self.line = line
        self.source = source
        where = ""
        if source is not None:
            where += f"{source}"
        if line is not None:
            where += f"{':' if where else 'line '}{line}"
        super().__init__(f"{where}: {message}" if where else message)


class ValidationError(SentiBTError):
    pass


class DuplicateRecordError(ValidationError):
    pass


class DataGapError(SentiBTError):
    def __init__(self, asset: str, date):
        self.asset = asset
        self.date = date
        super().__init__(f"no price bar for {asset} on {date}")


class NoPredecessorError(SentiBTError):
    pass


class ConfigError(SentiBTError):
    pass


class ScoringError(SentiBTError):
    pass


class ContractError(SentiBTError):
    pass
