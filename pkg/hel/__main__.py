from hel.lab.cli import main

main()
