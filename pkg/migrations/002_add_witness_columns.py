def up(conn):
    """
    Add witness kind and tau size columns to reports
    """
    cursor = conn.cursor()

    cursor.execute("PRAGMA table_info(reports)")
    columns = [col[1] for col in cursor.fetchall()]

    if 'witness_kind' not in columns:
        cursor.execute('''
            ALTER TABLE reports
            ADD COLUMN witness_kind TEXT
        ''')

    if 'tau_size' not in columns:
        cursor.execute('''
            ALTER TABLE reports
            ADD COLUMN tau_size INTEGER
        ''')


def down(conn):
    """
    Rebuild reports without the witness columns; SQLite before 3.35 cannot drop columns
    """
    cursor = conn.cursor()
    cursor.execute('ALTER TABLE reports RENAME TO reports_old')
    cursor.execute('DROP INDEX IF EXISTS idx_reports_problem')
    cursor.execute('''
        CREATE TABLE reports (
            id INTEGER PRIMARY KEY AUTOINCREMENT,
            command TEXT NOT NULL,
            problem TEXT NOT NULL,
            answer TEXT,
            branch TEXT,
            payload TEXT NOT NULL,
            created_at DATETIME DEFAULT CURRENT_TIMESTAMP
        )
    ''')
    cursor.execute('''
        INSERT INTO reports (id, command, problem, answer, branch, payload, created_at)
        SELECT id, command, problem, answer, branch, payload, created_at FROM reports_old
    ''')
    cursor.execute('DROP TABLE reports_old')
    cursor.execute('CREATE INDEX IF NOT EXISTS idx_reports_problem ON reports (problem)')
