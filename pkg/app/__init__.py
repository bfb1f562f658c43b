"""DSS - surveillance par drone : estimation de pose et détection d'activités violentes"""
