import json
import logging
import os

import yaml

from config.custom_json_logger import custom_json_logger

CONFIG_DIR = os.path.join(os.path.dirname(os.path.dirname(os.path.abspath(__file__))), 'config')


def record(**extra):
    return logging.makeLogRecord({
        'msg': 'replayed %s', 'args': ('A3.deg1',), 'levelname': 'INFO', 'name': 'lctdv.certify', **extra,
    })


def test_json_record_carries_context():
    formatter = custom_json_logger(format_keys={'level': 'levelname', 'logger': 'name', 'message': 'message'})
    entry = json.loads(formatter.format(record(lemma='A3.deg1', location='E1,E2')))
    assert entry['level'] == 'INFO'
    assert entry['logger'] == 'lctdv.certify'
    assert entry['message'] == 'replayed A3.deg1'
    assert entry['context'] == {'lemma': 'A3.deg1', 'location': 'E1,E2'}
    assert 'timestamp' in entry


def test_json_record_without_context():
    entry = json.loads(custom_json_logger().format(record()))
    assert 'context' not in entry
    assert entry['message'] == 'replayed A3.deg1'


def test_logging_config_uses_the_json_formatter():
    with open(os.path.join(CONFIG_DIR, 'logging_config.yaml'), 'r') as f:
        log_config = yaml.safe_load(f)
    assert log_config['formatters']['json']['()'] == 'config.custom_json_logger.custom_json_logger'
    assert log_config['handlers']['queue_handler']['handlers'] == ['stderr', 'file']
    assert set(log_config['formatters']['json']['context_keys']) == {'surface', 'lemma', 'location', 'step'}


def test_config_yaml():
    with open(os.path.join(CONFIG_DIR, 'config.yaml'), 'r') as f:
        config = yaml.safe_load(f)
    assert config['fixtures_dir'] == 'fixtures'
    assert {item['singularities'] for item in config['skip_allowlist']} == {'E6', 'A5+A1', '3A2'}
