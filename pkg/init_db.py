from database.db import init_db, engine, DATABASE_URL
from database.models import Base
import os

if __name__ == "__main__":
    print("=== Run Ledger Initialization ===")

    print(f"Database URL: {DATABASE_URL}")
    if DATABASE_URL.startswith("sqlite:///"):
        db_path = os.path.abspath(DATABASE_URL[len("sqlite:///"):])
        exists = os.path.exists(db_path)
        print(f"Database file exists: {exists}")
        if exists:
            print(f"Database file size: {os.path.getsize(db_path)} bytes")

    print("\nInitializing database...")
    init_db(engine)

    print("\nCreated tables:")
    for table_name in Base.metadata.tables:
        print(f"- {table_name}")

    print("\nRun ledger initialized successfully!")
