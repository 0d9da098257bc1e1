def up(conn):
    """
    Reports of decide and check runs, one row per run
    """
    cursor = conn.cursor()
    cursor.execute('''
        CREATE TABLE IF NOT EXISTS reports (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            command TEXT NOT NULL,
            problem TEXT NOT NULL,
            answer TEXT,
            branch TEXT,
            payload TEXT NOT NULL,
            created_at DATETIME DEFAULT CURRENT_TIMESTAMP
        )
    ''')
    cursor.execute('CREATE INDEX IF NOT EXISTS idx_reports_problem ON reports (problem)')


def down(conn):
    cursor = conn.cursor()
    cursor.execute('DROP INDEX IF EXISTS idx_reports_problem')
    cursor.execute('DROP TABLE IF EXISTS reports')
