"""
Result tables and their CSV / JSON renderings.

CSV output starts with '#' comment lines (command and sorted-JSON config echo,
then the column units), followed by the header row and the data rows. JSON
output carries the same metadata as keys beside the rows.
Floats are written with 9 significant digits in lowercase scientific notation.
"""
import csv
import hashlib
import io
import json
import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class Column:
    name: str
    unit: str = ''


@dataclass
class Table:
    columns: list
    rows: list = field(default_factory=list)

    @property
    def names(self):
        return [column.name for column in self.columns]

    def add(self, **values):
        unknown = set(values) - set(self.names)
        if unknown:
            raise KeyError(f"Unknown column(s): {', '.join(sorted(unknown))}")
        self.rows.append({name: values.get(name) for name in self.names})

    def column(self, name):
        return [row[name] for row in self.rows]


def format_value(value):
    if value is None:
        return ''
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.8e}"
    return str(value)


def config_echo(config):
    return json.dumps(config.to_dict(), sort_keys=True, separators=(',', ':'))


def units(table):
    return {column.name: column.unit for column in table.columns if column.unit}


def render_csv(table, config):
    buffer = io.StringIO()
    buffer.write(f"# {config.command} {config_echo(config)}\n")
    units_line = ' '.join(f"{name}={unit}" for name, unit in units(table).items())
    buffer.write(f"# units: {units_line}\n")
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(table.names)
    for row in table.rows:
        writer.writerow([format_value(row[name]) for name in table.names])
    return buffer.getvalue()


def _json_value(value):
    if isinstance(value, float) and not math.isfinite(value):
        return str(value)
    return value


def render_json(table, config):
    """The CSV metadata as keys next to the rows."""
    document = {
        'command': config.command,
        'config': dict(sorted(config.to_dict().items())),
        'units': units(table),
        'rows': [{name: _json_value(row[name]) for name in table.names} for row in table.rows],
    }
    return json.dumps(document, indent=2) + '\n'


def render(table, config, as_json=False):
    return render_json(table, config) if as_json else render_csv(table, config)


def digest(text):
    return hashlib.sha256(text.encode('utf-8')).hexdigest()


def parse_csv(text):
    """Rows of a rendered CSV table as dicts of strings (comment lines skipped)."""
    lines = [line for line in text.splitlines() if not line.startswith('#')]
    return list(csv.DictReader(lines))
