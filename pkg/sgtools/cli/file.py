import csv
import json
import logging
import os
import tempfile

import yaml

from sgtools.errors import IoError, ParseError

logger = logging.getLogger(__name__)


def read_schema_file(file_path):
    try:
        with open(file_path) as schema_file:
            schema = json.load(schema_file)
    except OSError as e:
        raise IoError("unable to read {}: {}".format(file_path, e))
    except json.JSONDecodeError as e:
        raise ParseError("{}: line {} column {}: {}".format(
            file_path, e.lineno, e.colno, e.msg))
    return schema


def read_spec_file(file_path):
    try:
        with open(file_path) as spec_file:
            spec = yaml.safe_load(spec_file)
    except OSError as e:
        raise IoError("unable to read {}: {}".format(file_path, e))
    except yaml.YAMLError as e:
        mark = getattr(e, 'problem_mark', None)
        where = "line {} column {}: ".format(
            mark.line + 1, mark.column + 1) if mark else ''
        raise ParseError("{}: {}{}".format(file_path, where, e))
    return spec


def read_config_file(file_path):
    """Reads a YAML spec or a JSON schema file, chosen by extension."""
    if str(file_path).lower().endswith(('.yaml', '.yml')):
        config = read_spec_file(file_path)
    else:
        config = read_schema_file(file_path)
    if config is None:
        return {}
    if not isinstance(config, dict):
        raise ParseError("{}: top level must be a mapping".format(file_path))
    return config


def _atomic_write(file_path, write):
    directory = os.path.dirname(os.path.abspath(file_path))
    try:
        os.makedirs(directory, exist_ok=True)
        handle, temp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-')
    except OSError as e:
        raise IoError("unable to write {}: {}".format(file_path, e))
    try:
        with os.fdopen(handle, 'w', newline='') as out_file:
            write(out_file)
        os.replace(temp_path, file_path)
    except OSError as e:
        raise IoError("unable to write {}: {}".format(file_path, e))
    finally:
        if os.path.exists(temp_path):
            os.remove(temp_path)
    logger.debug("wrote {}".format(file_path))


def write_schema_file(file_path, document):
    _atomic_write(file_path,
                  lambda out_file: json.dump(document, out_file, indent=4))


def write_csv_file(file_path, header, rows):
    def write(out_file):
        writer = csv.writer(out_file)
        writer.writerow(header)
        writer.writerows(rows)
    _atomic_write(file_path, write)


def read_csv_file(file_path):
    try:
        with open(file_path, newline='') as in_file:
            return list(csv.DictReader(in_file))
    except OSError as e:
        raise IoError("unable to read {}: {}".format(file_path, e))


def write_binary_file(file_path, payload):
    directory = os.path.dirname(os.path.abspath(file_path))
    try:
        os.makedirs(directory, exist_ok=True)
        handle, temp_path = tempfile.mkstemp(dir=directory, prefix='.tmp-')
        with os.fdopen(handle, 'wb') as out_file:
            out_file.write(payload)
        os.replace(temp_path, file_path)
    except OSError as e:
        raise IoError("unable to write {}: {}".format(file_path, e))
    finally:
        if 'temp_path' in locals() and os.path.exists(temp_path):
            os.remove(temp_path)
