import os
import json
import sqlite3
import logging
from datetime import datetime

import pandas as pd

from config import DATABASE_PATH, EXPORT_DIR
from migrations.migration_manager import MigrationManager
from problem_file import Report


class ReportStore:
    def __init__(self, db_path = DATABASE_PATH):
        self.db_path = db_path
        self.logger = logging.getLogger(__name__)
        self.setup_database()

    def setup_database(self):
        """
        Bring the reports schema up to date through the migrations directory
        """
        manager = MigrationManager(self.db_path)
        if not manager.migrate():
            self.logger.error(f"Report store {self.db_path} could not be migrated")

    def save_report(self, report: Report):
        """
        Store one report; returns the row id or None
        """
        result = report.result if isinstance(report.result, dict) else {}
        witness = result.get('witness') or {}
        try:
            conn = sqlite3.connect(self.db_path)
            cursor = conn.cursor()
            cursor.execute('''
                INSERT INTO reports (command, problem, answer, branch, payload, witness_kind, tau_size)
                VALUES (?, ?, ?, ?, ?, ?, ?)
            ''', (report.command, report.problem, report.answer, result.get('branch'),
                  json.dumps(report.to_dict(), sort_keys = True, default = str),
                  witness.get('kind'), witness.get('tau_size')))
            conn.commit()
            row_id = cursor.lastrowid
            conn.close()
            self.logger.info(f"Stored report {row_id} for {report.command} on {report.problem}")
            return row_id

        except sqlite3.Error as e:
            self.logger.error(f"Error storing report for {report.problem}: {e}")
            return None

    def load_reports(self, problem = None):
        conn = sqlite3.connect(self.db_path)
        query = '''
                SELECT id, command, problem, answer, branch, witness_kind, tau_size, created_at
                  FROM reports
                '''
        params = []
        if problem:
            query += " WHERE problem = ?"
            params.append(problem)
        query += " ORDER BY id"

        df = pd.read_sql_query(query, conn, params = params, parse_dates = ['created_at'])
        conn.close()
        return df

    def load_payload(self, report_id):
        conn = sqlite3.connect(self.db_path)
        row = conn.execute('SELECT payload FROM reports WHERE id = ?', (report_id,)).fetchone()
        conn.close()
        return json.loads(row[0]) if row else None

    def export_reports(self, output_format = 'csv', problem = None, export_dir = EXPORT_DIR):
        """
        Export stored report summaries
        """
        df = self.load_reports(problem)
        if df.empty:
            self.logger.warning("No reports to export")
            return None

        os.makedirs(export_dir, exist_ok = True)
        timestamp = datetime.now().strftime('%Y%m%d_%H%M%S')

        if output_format.lower().lstrip('.') == 'csv':
            filename = os.path.join(export_dir, f"reports_{timestamp}.csv")
            df.to_csv(filename, index = False)

        elif output_format.lower().lstrip('.') == 'json':
            filename = os.path.join(export_dir, f"reports_{timestamp}.json")
            df.to_json(filename, orient = 'records', date_format = 'iso')

        else:
            self.logger.error(f"Unsupported format: {output_format}")
            return None

        self.logger.info(f"Reports exported to: {filename}")
        return filename

    def answer_summary(self):
        """
        Count of stored answers per command
        """
        df = self.load_reports()
        if df.empty:
            return df
        return df.fillna({'answer': 'none'}).groupby(['command', 'answer']).size().reset_index(name = 'count')
