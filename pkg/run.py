import os
import sys
from dotenv import load_dotenv

load_dotenv()

from flask.cli import FlaskGroup

from app import create_app

app = create_app(os.environ.get('FLASK_CONFIG') or 'default')

cli = FlaskGroup(create_app=lambda: app, add_default_commands=False, load_dotenv=False)


if __name__ == '__main__':
    sys.exit(cli.main(prog_name='run.py'))
