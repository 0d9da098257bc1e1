"""
Tests for the sqlite report store and its migrations.
"""

import sqlite3

import pandas as pd

from conftest import load_problem
from decide import decide_matrices
import run_migrations
from migrations.migration_manager import MigrationManager
from problem_file import Report
from report_store import ReportStore


def decide_report(name):
    decision = decide_matrices(load_problem(name).family())
    return Report('decide', name, decision.to_dict(), decision.answer)


def test_migrations_create_reports_table(tmp_path):
    db = str(tmp_path / 'reports.db')
    manager = MigrationManager(db)
    assert manager.get_pending_migrations() == ['001_create_reports_table', '002_add_witness_columns']
    assert manager.migrate()
    assert manager.get_pending_migrations() == []
    conn = sqlite3.connect(db)
    columns = [row[1] for row in conn.execute('PRAGMA table_info(reports)')]
    conn.close()
    assert 'witness_kind' in columns and 'tau_size' in columns


def test_rollback_forgets_migration(tmp_path):
    manager = MigrationManager(str(tmp_path / 'reports.db'))
    manager.migrate()
    assert manager.rollback_migration('001_create_reports_table')
    assert manager.get_pending_migrations() == ['001_create_reports_table']


def test_rollback_drops_witness_columns(tmp_path):
    db = str(tmp_path / 'reports.db')
    store = ReportStore(db)
    store.save_report(decide_report('flip'))
    assert MigrationManager(db).rollback_migration('002_add_witness_columns')
    conn = sqlite3.connect(db)
    columns = [row[1] for row in conn.execute('PRAGMA table_info(reports)')]
    rows = conn.execute('SELECT problem, answer FROM reports').fetchall()
    indexes = [row[1] for row in conn.execute('PRAGMA index_list(reports)')]
    conn.close()
    assert 'witness_kind' not in columns and 'tau_size' not in columns
    assert rows == [('flip', 'no')]
    assert 'idx_reports_problem' in indexes


def test_save_and_load(tmp_path):
    store = ReportStore(str(tmp_path / 'reports.db'))
    first = store.save_report(decide_report('cpc-and-or'))
    store.save_report(decide_report('flip'))
    store.save_report(Report('check leibniz', 'intro', {'congruence': {}}))

    df = store.load_reports()
    assert list(df['problem']) == ['cpc-and-or', 'flip', 'intro']
    assert df.loc[0, 'witness_kind'] == 'equivalent-pair-construction'
    assert df.loc[0, 'tau_size'] > 0
    assert df.loc[1, 'branch'] == 'graph-based-unary'
    assert pd.isna(df.loc[2, 'answer'])

    payload = store.load_payload(first)
    assert payload['answer'] == 'yes'
    assert store.load_payload(999) is None
    assert len(store.load_reports('flip')) == 1


def test_answer_summary(tmp_path):
    store = ReportStore(str(tmp_path / 'reports.db'))
    assert store.answer_summary().empty
    for name in ('flip', 'three-cycle', 'identity-box'):
        store.save_report(decide_report(name))
    summary = store.answer_summary()
    counts = dict(zip(summary['answer'], summary['count']))
    assert counts == {'no': 2, 'yes': 1}


def test_export(tmp_path):
    store = ReportStore(str(tmp_path / 'reports.db'))
    assert store.export_reports('csv', export_dir = str(tmp_path / 'exports')) is None
    store.save_report(decide_report('flip'))
    filename = store.export_reports('csv', export_dir = str(tmp_path / 'exports'))
    assert filename.endswith('.csv')
    assert list(pd.read_csv(filename)['answer']) == ['no']
    assert store.export_reports('xlsx', export_dir = str(tmp_path / 'exports')) is None


def test_migration_script(tmp_path, capsys):
    db = str(tmp_path / 'reports.db')
    assert run_migrations.main(['--db', db, '--status']) == 0
    assert '2 pending migrations' in capsys.readouterr().out
    assert run_migrations.main(['--db', db]) == 0
    assert run_migrations.main(['--db', db, '--rollback', '002_add_witness_columns']) == 0
    assert run_migrations.main(['--db', db, '--rollback', '999_missing']) == 1
    run_migrations.main(['--db', db, '--status'])
    assert '002_add_witness_columns' in capsys.readouterr().out.splitlines()[-1]
