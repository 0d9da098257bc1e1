import sqlite3
import os
import logging
import re


MIGRATION_PATTERN = re.compile(r'^\d{3}_[a-z0-9_]+\.py$')


class MigrationManager:
    def __init__(self, db_path):
        self.db_path = db_path
        self.migrations_dir = os.path.dirname(os.path.abspath(__file__))
        self.logger = logging.getLogger(__name__)
        self.setup_migrations_table()

    def setup_migrations_table(self):
        """
        Create the bookkeeping table of applied report-store migrations
        """
        conn = sqlite3.connect(self.db_path)
        try:
            conn.execute('''
                CREATE TABLE IF NOT EXISTS schema_migrations (
                    id INTEGER PRIMARY KEY AUTOINCREMENT,
                    migration_name TEXT NOT NULL UNIQUE,
                    applied_at DATETIME DEFAULT CURRENT_TIMESTAMP,
                    success BOOLEAN DEFAULT 1
                )
            ''')
            conn.commit()
        finally:
            conn.close()

    def get_applied_migrations(self):
        conn = sqlite3.connect(self.db_path)
        try:
            rows = conn.execute('SELECT migration_name FROM schema_migrations WHERE success = 1').fetchall()
        finally:
            conn.close()
        return {row[0] for row in rows}

    def get_pending_migrations(self):
        """
        Migration modules not yet applied, in file-name order
        """
        names = sorted(filename[:-3] for filename in os.listdir(self.migrations_dir)
                       if MIGRATION_PATTERN.match(filename))
        applied = self.get_applied_migrations()
        return [name for name in names if name not in applied]

    def load_migration(self, migration_name):
        module = __import__(f"migrations.{migration_name}", fromlist = [migration_name])
        if not hasattr(module, 'up') or not hasattr(module, 'down'):
            raise ValueError(f"Migration {migration_name} must define 'up' and 'down'")
        return module

    def apply_migration(self, migration_name):
        try:
            module = self.load_migration(migration_name)
        except Exception as e:
            self.logger.error(f"Could not load migration {migration_name}: {e}")
            return False

        conn = sqlite3.connect(self.db_path)
        try:
            module.up(conn)
            conn.execute('INSERT OR REPLACE INTO schema_migrations (migration_name, success) VALUES (?, 1)',
                         (migration_name,))
            conn.commit()
            self.logger.info(f"Applied migration: {migration_name}")
            return True
        except sqlite3.Error as e:
            conn.rollback()
            self.logger.error(f"Migration {migration_name} failed: {e}")
            conn.execute('INSERT OR REPLACE INTO schema_migrations (migration_name, success) VALUES (?, 0)',
                         (migration_name,))
            conn.commit()
            return False
        finally:
            conn.close()

    def rollback_migration(self, migration_name):
        """
        Run a migration's down step and forget it
        """
        try:
            module = self.load_migration(migration_name)
        except Exception as e:
            self.logger.error(f"Could not load migration {migration_name}: {e}")
            return False

        conn = sqlite3.connect(self.db_path)
        try:
            module.down(conn)
            conn.execute('DELETE FROM schema_migrations WHERE migration_name = ?', (migration_name,))
            conn.commit()
            self.logger.info(f"Rolled back migration: {migration_name}")
            return True
        except sqlite3.Error as e:
            conn.rollback()
            self.logger.error(f"Rollback of {migration_name} failed: {e}")
            return False
        finally:
            conn.close()

    def migrate(self):
        pending = self.get_pending_migrations()
        if not pending:
            self.logger.info("No pending migrations")
            return True

        self.logger.info(f"Applying {len(pending)} migrations...")
        for migration_name in pending:
            if not self.apply_migration(migration_name):
                self.logger.error(f"Stopping after failed migration {migration_name}")
                return False
        self.logger.info("Report store schema is up to date")
        return True
