from pathlib import Path

from .errors import MalformedFileError, MissingFileError


def read_key_value(path: str | Path) -> dict[str, str]:
    """
    Reads a plain-text ``key = value`` file.

    Blank lines and everything after ``#`` are ignored. Values are returned as stripped strings,
    conversion is left to the pydantic model that consumes them.

    Parameters
    ----------
    path : str | Path
        File to read.

    Returns
    -------
    dict[str, str]
        Keys in file order.

    Raises
    ------
    MissingFileError
        If the file does not exist.
    MalformedFileError
        If a line has no ``=`` or a key is repeated.
    """
    path = Path(path)
    if not path.is_file():
        raise MissingFileError(path, "configuration file not found")
    values = {}
    for number, line in enumerate(path.read_text().splitlines(), start=1):
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise MalformedFileError(path, f"line {number} is not of the form 'key = value'")
        key, value = (part.strip() for part in line.split("=", 1))
        if key in values:
            raise MalformedFileError(path, f"line {number} repeats key '{key}'")
        values[key] = value
    return values
