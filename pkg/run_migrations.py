import sys
import os
import argparse
import logging
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

from migrations.migration_manager import MigrationManager
from config import DATABASE_PATH


def main(argv = None):
    parser = argparse.ArgumentParser(description = "Manage the report store schema")
    parser.add_argument('--db', default = DATABASE_PATH, help = "Report store database")
    parser.add_argument('--status', action = 'store_true', help = "List pending migrations and exit")
    parser.add_argument('--rollback', metavar = 'NAME', help = "Run the down step of one migration")
    args = parser.parse_args(argv)

    manager = MigrationManager(args.db)

    if args.status:
        pending = manager.get_pending_migrations()
        print(f"{len(pending)} pending migrations")
        for name in pending:
            print(f"  {name}")
        return 0

    if args.rollback:
        if manager.rollback_migration(args.rollback):
            print(f"Rolled back {args.rollback}")
            return 0
        print("Rollback failed!")
        return 1

    if manager.migrate():
        print(f"Report store {args.db} migrated successfully!")
        return 0
    print("Migration failed!")
    return 1


if __name__ == "__main__":
    logging.basicConfig(level = logging.INFO)
    sys.exit(main())
