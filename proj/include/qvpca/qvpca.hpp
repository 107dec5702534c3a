#pragma once

#include <qvpca/error.hpp>
#include <qvpca/linalg.hpp>
#include <qvpca/qv.hpp>
#include <qvpca/pca.hpp>
#include <qvpca/simulation.hpp>
#include <qvpca/factor_model.hpp>
#include <qvpca/fourier.hpp>
#include <qvpca/manifold.hpp>
#include <qvpca/io.hpp>
#include <qvpca/run.hpp>
