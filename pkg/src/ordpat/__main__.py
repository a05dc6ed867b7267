from ordpat.cli import main

main()
